"""Command-line runner: verification suites, sweeps, transforms and kernel values.

Every command accepts ``--config FILE`` (key = value lines) and ``--seed``;
flags given explicitly override file values.  The thread count of the
numerical libraries is taken from ``GRUSHIN_RIESZ_THREADS`` and must be
applied before numpy is imported, which is why it happens at the top of this
module.
"""

from __future__ import annotations

import os

_THREADS = os.environ.get("GRUSHIN_RIESZ_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import csv  # noqa: E402
import io  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
from pathlib import Path  # noqa: E402
from typing import Any  # noqa: E402

import click  # noqa: E402
import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .config import ConfigError, get_typed, load_config, resolve  # noqa: E402

CONFIG_ERROR = 2
CHECK_FAILURE = 1

SUITE_NAMES = ("hermite", "riesz", "kernel", "transfer", "representation", "all")
TRANSFORMS = ("riesz", "riesz-star", "riesz-mc", "vector")
CSV_HEADER = ("n", "p", "epsilon", "estimate", "stderr", "seed", "trial_id", "grid_hash")


def _exit_config(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(CONFIG_ERROR)


def _load(config_path: str | None, **flags: Any) -> dict[str, Any]:
    try:
        return resolve(load_config(config_path), flags)
    except ConfigError as exc:
        _exit_config(str(exc))


def _int_list(value: Any, key: str) -> list[int]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    try:
        return [int(v) for v in np.atleast_1d(value)]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def _float_list(value: Any, key: str) -> list[float]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    try:
        return [float(v) for v in np.atleast_1d(value)]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def _json_default(obj: Any) -> Any:
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        _exit_config(f"cannot write {path}: {exc}")


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Grushin-Riesz numerical toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# verify


@main.command()
@click.argument("suite")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--samples", type=int, default=None, help="MC samples for the representation suite.")
@click.option("--epsilon", type=float, default=None, help="Truncation for the representation suite.")
@click.option("--report", type=click.Path(), default=None, help="JSON report path (default: stdout).")
def verify(suite: str, config_path, seed, samples, epsilon, report) -> None:
    """Run a verification suite: hermite, riesz, kernel, transfer, representation or all."""
    if suite not in SUITE_NAMES:
        _exit_config(f"unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES)}")
    cfg = _load(config_path, seed=seed, samples=samples, epsilon=epsilon, report=report)
    from .verify import run_suite

    try:
        checks = run_suite(suite, cfg)
    except ConfigError as exc:
        _exit_config(str(exc))
    passed = all(c.passed for c in checks)
    doc = {
        "suite": suite,
        "version": __version__,
        "config": cfg,
        "passed": passed,
        "checks": [c.to_dict() for c in checks],
    }
    for c in checks:
        click.echo(c.line(), err=True)
    out = cfg.get("report")
    if out:
        _write_text(Path(out), _dump(doc))
    else:
        click.echo(_dump(doc), nl=False)
    sys.exit(0 if passed else CHECK_FAILURE)


# ---------------------------------------------------------------------------
# sweep


def _sweep_config(cfg: dict[str, Any]):
    from .sweep import SweepConfig

    grids = cfg.get("grids") or {}
    if not isinstance(grids, dict):
        raise ConfigError("grids must be a JSON object {n: [[lo, hi, count], ...]}")
    try:
        return SweepConfig(
            dims=tuple(_int_list(cfg.get("dims", [1]), "dims")),
            exponents=tuple(_float_list(cfg.get("exponents", [2.0]), "exponents")),
            trials=get_typed(cfg, "trials", int, 1),
            seed=get_typed(cfg, "seed", int, 0),
            family=get_typed(cfg, "family", str, "gaussian-hermite"),
            op=get_typed(cfg, "op", str, "riesz"),
            epsilon=get_typed(cfg, "epsilon", float, None),
            grids={int(k): tuple(tuple(a) for a in v) for k, v in grids.items()},
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _format_float(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.n, _format_float(r.p), _format_float(r.epsilon), _format_float(r.estimate),
                         _format_float(r.stderr), r.seed, r.trial_id, r.grid_hash])
    return buf.getvalue()


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--dims", default=None, help="Comma-separated dimensions n.")
@click.option("--p", "exponents", default=None, help="Comma-separated exponents p > 1.")
@click.option("--trials", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--family", type=click.Choice(["gaussian-hermite", "bump-mix"]), default=None)
@click.option("--op", type=click.Choice(["riesz", "identity"]), default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--out", type=click.Path(), default=None, help="CSV path; sidecar gets .json.")
def sweep(config_path, dims, exponents, trials, seed, family, op, epsilon, out) -> None:
    """Lower-bound sweep of ||op f||_p / ||f||_p over random fields and dimensions."""
    cfg = _load(config_path, dims=dims, exponents=exponents, trials=trials, seed=seed,
                family=family, op=op, epsilon=epsilon, out=out)
    try:
        scfg = _sweep_config(cfg)
    except ConfigError as exc:
        _exit_config(str(exc))
    out_path = Path(cfg.get("out") or "sweep.csv")
    sidecar = out_path.with_suffix(".json")
    # fail before the (long) computation when the destination cannot be written
    for path in (out_path, sidecar):
        try:
            with open(path, "a"):
                pass
        except OSError as exc:
            _exit_config(f"cannot write {path}: {exc}")

    from .sweep import dimension_sweep

    records, failures = dimension_sweep(scfg)
    if not records:
        click.echo("error: every sweep cell failed", err=True)
        for f in failures:
            click.echo(f"  {f}", err=True)
        sys.exit(CHECK_FAILURE)
    _write_text(out_path, records_csv(records))
    _write_text(sidecar, _dump({"version": __version__, "config": scfg.to_dict(),
                                "failures": failures, "records": out_path.name}))
    for f in failures:
        click.echo(f"warning: {f}", err=True)


# ---------------------------------------------------------------------------
# apply


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--transform", type=click.Choice(TRANSFORMS), default=None)
@click.option("--j", "axis", type=int, default=None, help="Coordinate axis (0-based).")
@click.option("--epsilon", type=float, default=None)
@click.option("--convention", type=click.Choice(["symmetric", "representation"]), default=None)
@click.option("--samples", type=int, default=None, help="MC samples for riesz-mc.")
@click.option("--max-degree", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--in", "in_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def apply(config_path, transform, axis, epsilon, convention, samples, max_degree, seed,
          in_path, out_path) -> None:
    """Apply a Grushin-Riesz transform to a stored grid function."""
    cfg = _load(config_path, transform=transform, j=axis, epsilon=epsilon, convention=convention,
                samples=samples, max_degree=max_degree, seed=seed, input=in_path, output=out_path)
    from .grid import load_grid, save_grid
    from .grushin import apply_grushin_riesz, apply_grushin_riesz_mc, vector_riesz_magnitude

    try:
        kind = get_typed(cfg, "transform", str, None)
        if kind not in TRANSFORMS:
            raise ConfigError(f"transform must be one of {', '.join(TRANSFORMS)}")
        j = get_typed(cfg, "j", int, 0)
        eps = get_typed(cfg, "epsilon", float, None)
        conv = get_typed(cfg, "convention", str, "symmetric")
        degree = get_typed(cfg, "max_degree", int, 24)
        src, dst = cfg.get("input"), cfg.get("output")
        if not src or not dst:
            raise ConfigError("both --in and --out are required")
    except ConfigError as exc:
        _exit_config(str(exc))
    try:
        f = load_grid(src)
    except (OSError, ValueError) as exc:
        _exit_config(f"cannot read grid {src}: {exc}")
    try:
        if kind == "vector":
            g = vector_riesz_magnitude(f, epsilon=eps, max_degree=degree)
        elif kind == "riesz-mc":
            if eps is None:
                raise ConfigError("riesz-mc needs --epsilon")
            res = apply_grushin_riesz_mc(f, j, False, eps, get_typed(cfg, "samples", int, 100_000),
                                         get_typed(cfg, "seed", int, 0))
            g = f.with_values(res.values.reshape(f.shape), stderr_max=float(np.max(res.stderr)))
        else:
            g = apply_grushin_riesz(f, j, kind == "riesz-star", epsilon=eps, convention=conv,
                                    max_degree=degree)
    except ConfigError as exc:
        _exit_config(str(exc))
    except ValueError as exc:
        _exit_config(str(exc))
    try:
        save_grid(dst, g, {"version": __version__, "config": cfg})
    except OSError as exc:
        _exit_config(f"cannot write {dst}: {exc}")


# ---------------------------------------------------------------------------
# kernel


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--eval", "what", type=click.Choice(["p", "q", "grad"]), default=None)
@click.option("--at", "at", default=None,
              help="Comma-separated point: x_1..x_n, y_1..y_n, then t (for q: lam).")
@click.option("--n", "dim", type=int, default=None)
@click.option("--s", "time", type=float, default=None, help="Heat time (default 1).")
@click.option("--seed", type=int, default=None)
def kernel(config_path, what, at, dim, time, seed) -> None:
    """Evaluate the heat kernel p_s, its partial transform q_s or the gradient of p_1."""
    cfg = _load(config_path, eval=what, at=at, n=dim, s=time, seed=seed)
    from .heisenberg import KernelParams, p1_derivatives, p_kernel, q_kernel, zgrad_p1

    try:
        kind = get_typed(cfg, "eval", str, "p")
        if kind not in ("p", "q", "grad"):
            raise ConfigError("eval must be p, q or grad")
        coords = _float_list(cfg.get("at", ""), "at")
        n = get_typed(cfg, "n", int, max(1, (len(coords) - 1) // 2))
        if len(coords) != 2 * n + 1:
            raise ConfigError(f"--at needs 2n + 1 = {2 * n + 1} numbers, got {len(coords)}")
        params = KernelParams(n, get_typed(cfg, "s", float, 1.0))
    except (ConfigError, ValueError) as exc:
        _exit_config(str(exc))
    z = np.array(coords[:n]) + 1j * np.array(coords[n:2 * n])
    last = coords[-1]
    doc: dict[str, Any] = {"version": __version__, "config": cfg, "eval": kind}
    if kind == "p":
        doc["value"] = float(p_kernel(z[None, :], params, t=np.array([last]))[0])
    elif kind == "q":
        doc["value"] = float(q_kernel(z, last, params))
    else:
        if params.s != 1.0:
            _exit_config("grad is available for s = 1 only")
        _, radial, dt = p1_derivatives(z[None, :], np.array([last]), n)
        doc["d_dx"] = (z.real * radial[0]).tolist()
        doc["d_dy"] = (z.imag * radial[0]).tolist()
        doc["d_dt"] = float(dt[0])
        zp, zs = zip(*(zgrad_p1(z[None, :], np.array([last]), j) for j in range(n)))
        doc["Z"] = [complex(v[0]) for v in zp]
        doc["Z_star"] = [complex(v[0]) for v in zs]
    click.echo(_dump(doc), nl=False)


# ---------------------------------------------------------------------------
# field


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--n", "dim", type=int, default=None)
@click.option("--family", type=click.Choice(["gaussian-hermite", "bump-mix"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def field(config_path, dim, family, seed, out_path) -> None:
    """Write a reproducible random test field (unit L^2 norm) to a grid file."""
    cfg = _load(config_path, n=dim, family=family, seed=seed, output=out_path)
    from .grid import save_grid
    from .sweep import random_test_function

    try:
        n = get_typed(cfg, "n", int, 1)
        dst = cfg.get("output")
        if not dst:
            raise ConfigError("--out is required")
        f = random_test_function(n, get_typed(cfg, "seed", int, 0),
                                 get_typed(cfg, "family", str, "gaussian-hermite"))
    except (ConfigError, ValueError) as exc:
        _exit_config(str(exc))
    try:
        save_grid(dst, f, {"version": __version__, "config": cfg})
    except OSError as exc:
        _exit_config(f"cannot write {dst}: {exc}")


if __name__ == "__main__":
    main()
