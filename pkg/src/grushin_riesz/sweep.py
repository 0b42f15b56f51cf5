"""Random-search lower bounds for L^p norms of the vector Riesz transform.

For each (n, p) the estimate is max over random trials of ||op f||_p / ||f||_p.
Every number reported is realized by a stored trial, so it is a lower bound
for the operator norm on the discretized space, never a norm claim.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import GridFunction, lp_norm
from .grushin import SlicedField, half_offset_frequencies, slices_to_grid, vector_riesz_magnitude
from .rng import batch_rng

log = logging.getLogger(__name__)

FAMILIES = ("gaussian-hermite", "bump-mix")
#: families whose eta content sits on the antiperiodic frequency lattice; their
#: norms are taken over one eta period
PERIODIC_FAMILIES = ("gaussian-hermite",)
OPERATORS = ("identity", "riesz")

# default grids: roughly 10^6 - 10^7 points, coarser in higher dimension
DEFAULT_GRIDS = {
    1: ((-8.0, 8.0, 129), (-16.0, 16.0, 64)),
    2: ((-8.0, 8.0, 65),) * 2 + ((-16.0, 16.0, 32),),
    3: ((-8.0, 8.0, 41),) * 3 + ((-16.0, 16.0, 32),),
    4: ((-6.5, 6.5, 25),) * 4 + ((-16.0, 16.0, 16),),
}

#: frequency band of the band-limited family and its maximal per-axis degree
_BAND = (0.4, 1.2)
_DEGREE = {1: 4, 2: 3, 3: 2, 4: 1}


def default_axes(n: int) -> tuple[tuple[float, float, int], ...]:
    if n not in DEFAULT_GRIDS:
        raise ValueError(f"no default grid for n={n}; pass axes explicitly")
    return DEFAULT_GRIDS[n]


def grid_hash(axes) -> str:
    blob = json.dumps([list(map(float, a[:2])) + [int(a[2])] for a in axes]).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _band_profile(lam: np.ndarray, band: tuple[float, float]) -> np.ndarray:
    """Smooth bump in |lam| supported on the open band."""
    lo, hi = band
    s = (np.abs(lam) - lo) / (hi - lo)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    u = 2 * s[inside] - 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u * u))
    return out


def random_test_function(n: int, seed: int, family: str = "gaussian-hermite",
                         axes=None, degree: int | None = None) -> GridFunction:
    """Reproducible real random field with unit L^2 norm.

    ``gaussian-hermite``: every eta-frequency slice in a fixed band carries
    random Hermite coefficients of per-axis degree <= ``degree`` times a smooth
    band profile, with conjugate symmetry between lam and -lam.  The field is
    built by exact resynthesis, so it is band-limited by construction.

    ``bump-mix``: a signed sum of three random anisotropic Gaussians centred
    in the inner half of the grid.
    """
    axes = tuple(default_axes(n) if axes is None else axes)
    if len(axes) != n + 1:
        raise ValueError(f"expected {n + 1} axes, got {len(axes)}")
    rng = batch_rng(seed, n)
    if family == "gaussian-hermite":
        deg = _DEGREE.get(n, 2) if degree is None else degree
        lams, _ = half_offset_frequencies(axes[-1])
        profile = _band_profile(lams, _BAND)
        coeffs = [None] * len(lams)
        shape = (deg + 1,) * n
        for k in np.argsort(-lams):  # positive frequencies first
            lam = lams[k]
            if profile[k] == 0.0:
                coeffs[k] = np.zeros((1,) * n, dtype=complex)
            elif lam > 0:
                coeffs[k] = profile[k] * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
            else:
                mirror = int(np.argmin(np.abs(lams + lam)))
                coeffs[k] = np.conj(coeffs[mirror])
        f = slices_to_grid(SlicedField(lams, coeffs, axes))
        values = f.values.real
    elif family == "bump-mix":
        mesh = np.meshgrid(*(np.linspace(*a) for a in axes), indexing="ij")
        pts = np.stack(mesh, axis=-1)
        half = np.array([(hi - lo) / 4 for lo, hi, _ in axes])
        mid = np.array([(hi + lo) / 2 for lo, hi, _ in axes])
        values = np.zeros(pts.shape[:-1])
        for _ in range(3):
            center = mid + rng.uniform(-0.5, 0.5, size=n + 1) * half
            q, _r = np.linalg.qr(rng.normal(size=(n + 1, n + 1)))
            widths = rng.uniform(0.7, 1.5, size=n + 1)
            prec = (q / widths**2) @ q.T
            d = pts - center
            values += rng.choice([-1.0, 1.0]) * np.exp(-0.5 * np.einsum("...i,ij,...j->...", d, prec, d))
    else:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    f = GridFunction(values, axes, {"family": family, "seed": seed})
    norm = lp_norm(f, 2, periodic_eta=family in PERIODIC_FAMILIES)
    if norm == 0.0:
        raise ValueError("degenerate test function")
    return f.with_values(values / norm)


@dataclass(frozen=True)
class SweepConfig:
    dims: tuple[int, ...] = (1,)
    exponents: tuple[float, ...] = (2.0,)
    trials: int = 1
    seed: int = 0
    family: str = "gaussian-hermite"
    op: str = "riesz"
    epsilon: float | None = None
    grids: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(p <= 1 for p in self.exponents):
            raise ValueError("exponents must be > 1")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.op not in OPERATORS:
            raise ValueError(f"op must be one of {OPERATORS}")
        if self.epsilon is not None and not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")

    def axes(self, n: int):
        return tuple(tuple(a) for a in self.grids[n]) if n in self.grids else default_axes(n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        d["exponents"] = list(self.exponents)
        d["grids"] = {str(k): [list(a) for a in v] for k, v in self.grids.items()}
        return d


@dataclass(frozen=True)
class SweepRecord:
    n: int
    p: float
    epsilon: float | None
    estimate: float
    stderr: float
    seed: int
    trial_id: int
    grid_hash: str


def trial_seed(seed: int, trial: int) -> int:
    """Seed of trial ``trial``; trials are nested, so more trials only add seeds."""
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, dtype=np.uint64)[0] >> 1)


def apply_op(op: str, f: GridFunction, epsilon: float | None = None) -> GridFunction:
    if op == "identity":
        return f
    if op == "riesz":
        return vector_riesz_magnitude(f, epsilon=epsilon)
    raise ValueError(f"op must be one of {OPERATORS}, got {op!r}")


def trial_ratios(op: str, n: int, exponents, seed: int, trial: int, family: str = "gaussian-hermite",
                 axes=None, epsilon: float | None = None) -> dict[float, float]:
    """||op f||_p / ||f||_p for the single stored trial."""
    f = random_test_function(n, trial_seed(seed, trial), family, axes)
    g = apply_op(op, f, epsilon)
    periodic = family in PERIODIC_FAMILIES
    return {float(p): lp_norm(g, p, periodic) / lp_norm(f, p, periodic) for p in exponents}


def estimate_norm_lower_bound(op: str, n: int, p, trials: int, seed: int,
                              family: str = "gaussian-hermite", axes=None,
                              epsilon: float | None = None) -> list[SweepRecord]:
    """Max over trials of ||op f||_p / ||f||_p, one record per exponent.

    ``stderr`` is the standard deviation of the trial ratios (a spread, since
    the maximum has no sampling error in the usual sense).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    exponents = [float(q) for q in np.atleast_1d(p)]
    axes = tuple(default_axes(n) if axes is None else axes)
    ratios = {q: [] for q in exponents}
    ids = []
    for trial in range(trials):
        try:
            r = trial_ratios(op, n, exponents, seed, trial, family, axes, epsilon)
        except (ValueError, FloatingPointError) as exc:
            log.warning("n=%d trial %d skipped: %s", n, trial, exc)
            continue
        ids.append(trial)
        for q in exponents:
            ratios[q].append(r[q])
    if not ids:
        raise RuntimeError(f"every trial failed for n={n}")
    gh = grid_hash(axes)
    out = []
    for q in exponents:
        vals = np.array(ratios[q])
        best = int(np.argmax(vals))
        spread = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        out.append(SweepRecord(n, q, epsilon, float(vals[best]), spread, seed, ids[best], gh))
    return out


def dimension_sweep(config: SweepConfig) -> tuple[list[SweepRecord], list[str]]:
    """Full factorial sweep over dims; returns records ordered by (n, p) and failures."""
    records, failures = [], []
    for n in sorted(config.dims):
        try:
            recs = estimate_norm_lower_bound(config.op, n, list(config.exponents), config.trials,
                                             config.seed, config.family, config.axes(n),
                                             config.epsilon)
        except Exception as exc:  # a failed cell must not stop the sweep
            log.error("cell n=%d failed: %s", n, exc)
            failures.append(f"n={n}: {exc}")
            continue
        records.extend(sorted(recs, key=lambda r: r.p))
    return records, failures


def flatness(records: list[SweepRecord], p: float) -> float:
    """max / min of the estimates at exponent p across dimensions."""
    vals = [r.estimate for r in records if math.isclose(r.p, p)]
    return max(vals) / min(vals)
