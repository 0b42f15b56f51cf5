"""Truncated Hilbert transforms along Heisenberg curves and their transference.

Every truncated r-integral over eps < |r| < 1/eps against dr/r is computed
with a trapezoid rule in u = log r whose nodes are mirrored to negative r,
so each positive node r_k is paired with -r_k:

    int_{eps<|r|<1/eps} g(r) dr/r  ~  sum_k w_k (g(r_k) - g(-r_k)).

Anything constant along the integration direction therefore cancels exactly
at node level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import CubicSampler, GridFunction
from .heisenberg import HeisenbergPoint


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class CurveSpec:
    """The curve r -> (r z, r^2 t) together with a truncation window."""

    base: HeisenbergPoint
    epsilon: float

    def __post_init__(self):
        _check_epsilon(self.epsilon)

    def point(self, r: float) -> HeisenbergPoint:
        return HeisenbergPoint(r * self.base.z, r * r * self.base.t)


def log_pair_rule(epsilon: float, nodes: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Positive nodes r_k and trapezoid weights in log r over [eps, 1/eps].

    Returns empty arrays for eps = 1 (the window is empty).
    """
    epsilon = _check_epsilon(epsilon)
    if epsilon == 1.0:
        return np.zeros(0), np.zeros(0)
    if nodes < 2:
        raise ValueError("need at least two nodes")
    ell = -math.log(epsilon)
    u = np.linspace(-ell, ell, nodes)
    w = np.full(nodes, 2 * ell / (nodes - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return np.exp(u), w


def graded_pair_rule(epsilon: float, speed: Callable[[np.ndarray], np.ndarray],
                     feature: float, log_step: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """Positive nodes and dr/r weights graded to resolve a moving feature.

    ``speed(r)`` bounds how fast the integrand's argument moves per unit r and
    ``feature`` is the smallest length scale to resolve.  Nodes are uniform in
    the stretched coordinate phi with phi'(r) = 1/(r log_step) + speed(r)/feature,
    which stays log-uniform near r = eps and becomes arc-length uniform where
    the curve moves fast.
    """
    epsilon = _check_epsilon(epsilon)
    if epsilon == 1.0:
        return np.zeros(0), np.zeros(0)
    fine = np.exp(np.linspace(math.log(epsilon), -math.log(epsilon), 20001))
    dens = 1.0 / (fine * log_step) + speed(fine) / feature
    phi = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
    count = max(int(math.ceil(phi[-1])) + 1, 16)
    grid = np.linspace(0.0, phi[-1], count)
    r = np.interp(grid, phi, fine)
    drdphi = 1.0 / np.interp(r, fine, dens)
    w = np.full(count, phi[-1] / (count - 1)) * drdphi / r
    w[0] *= 0.5
    w[-1] *= 0.5
    return r, w


# ---------------------------------------------------------------------------
# transforms on the plane


def curve_transform_2d(f: GridFunction, x: float, t: float, v: float, epsilon: float,
                       nodes: int = 512, at: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """int_{eps<|r|<1/eps} f(u - r x, s - r^2 t - r v x) dr/r on a 2-d grid function.

    Evaluated on the grid of ``f`` unless ``at = (u, s)`` is given.
    """
    if f.ndim != 2:
        raise ValueError("expected a function on the plane")
    r, w = log_pair_rule(epsilon, nodes)
    u, s = f.mesh() if at is None else np.broadcast_arrays(*map(np.asarray, at))
    out = np.zeros(u.shape, dtype=complex)
    if r.size == 0:
        return out
    sample = f.sampler()
    for rk, wk in zip(r, w):
        plus = sample(u - rk * x, s - rk * rk * t - rk * v * x)
        minus = sample(u + rk * x, s - rk * rk * t + rk * v * x)
        out += wk * (plus - minus)
    return out


def hilbert_parabola_trunc(f: GridFunction, epsilon: float, nodes: int = 512) -> GridFunction:
    """Truncated Hilbert transform along the parabola r -> (r, r^2)."""
    return f.with_values(curve_transform_2d(f, 1.0, 1.0, 0.0, epsilon, nodes))


# ---------------------------------------------------------------------------
# U action and T_eps


def u_action(p: HeisenbergPoint, xi, eta):
    """U(x + iy, t)(xi, eta) = (xi - y, eta - t + x.y/2 - x.xi).

    ``xi`` has trailing dimension n.  This is a left action:
    U(a) o U(b) = U(a b) under the group product of HeisenbergPoint.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape[-1] != p.n:
        raise ValueError(f"xi has dimension {xi.shape[-1]}, point has n={p.n}")
    x, y = p.x, p.y
    return xi - y, eta - p.t + 0.5 * float(x @ y) - xi @ x


def t_epsilon_apply(f: GridFunction, curve: CurveSpec, nodes: int = 512,
                    at: tuple[np.ndarray, np.ndarray] | None = None) -> GridFunction | np.ndarray:
    """T_eps^{(z,t)} f(xi, eta) = int f(xi + r y, eta + r x.xi + r^2 (t + x.y/2)) dr/r.

    ``f`` lives on n spatial axes plus a final eta axis.  With ``at = (xi, eta)``
    (xi of shape (..., n)) the values at those points are returned as an array;
    otherwise the transform is evaluated on the grid of ``f``.
    """
    n = curve.base.n
    if f.ndim != n + 1:
        raise ValueError(f"grid has {f.ndim} axes, expected n + 1 = {n + 1}")
    if at is None:
        mesh = f.mesh()
        xi = np.stack(mesh[:-1], axis=-1)
        eta = mesh[-1]
    else:
        xi, eta = np.asarray(at[0], dtype=float), np.asarray(at[1], dtype=float)
    x, y = curve.base.x, curve.base.y
    tt = curve.base.t + 0.5 * float(x @ y)
    xdot = xi @ x
    r, w = log_pair_rule(curve.epsilon, nodes)
    out = np.zeros(eta.shape, dtype=complex)
    if r.size:
        sample = f.sampler()
        for rk, wk in zip(r, w):
            plus = sample(*(xi[..., i] + rk * y[i] for i in range(n)), eta + rk * xdot + rk * rk * tt)
            minus = sample(*(xi[..., i] - rk * y[i] for i in range(n)), eta - rk * xdot + rk * rk * tt)
            out += wk * (plus - minus)
    return out if at is not None else f.with_values(out)


# ---------------------------------------------------------------------------
# curve transform on the group


def _mul_arrays(w, s, a: np.ndarray, b: np.ndarray):
    """(w, s)(a, b) for broadcastable arrays; w, a complex with trailing n."""
    return w + a, s + b + 0.5 * np.sum(w * np.conj(a), axis=-1).imag


def hilbert_curve_trunc(F: Callable, curve: CurveSpec, at: HeisenbergPoint,
                        nodes: int = 512, side: str = "right") -> complex:
    """Truncated Hilbert transform of F along the curve, evaluated at one point.

    ``side="right"`` integrates F(g gamma(r)^{-1}) dr/r, ``side="left"``
    integrates F(gamma(r)^{-1} g) dr/r, with gamma(r) = (r z, r^2 t).  ``F``
    takes w (..., n) complex and s (...) real and returns values of shape (...).
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    r, w = log_pair_rule(curve.epsilon, nodes)
    if r.size == 0:
        return 0j
    z, t = curve.base.z, curve.base.t
    rr = np.concatenate([r, -r])
    ww = np.concatenate([w, -w])
    inv_z = -rr[:, None] * z[None, :]
    inv_t = -rr * rr * t
    g_z = np.broadcast_to(at.z, inv_z.shape)
    g_t = np.full(rr.shape, at.t)
    if side == "right":
        pz, pt = _mul_arrays(g_z, g_t, inv_z, inv_t)
    else:
        pz, pt = _mul_arrays(inv_z, inv_t, g_z, g_t)
    return complex(np.sum(ww * F(pz, pt)))


def transferred(f: Callable, xi: np.ndarray, eta: float) -> Callable:
    """F(w, s) = f(U(w, s)(xi, eta)) as a callback on the group.

    ``f`` takes (xi (..., n), eta (...)).
    """
    xi = np.asarray(xi, dtype=float)

    def F(w, s):
        w = np.asarray(w, dtype=complex)
        x, y = w.real, w.imag
        return f(xi - y, eta - s + 0.5 * np.sum(x * y, axis=-1) - x @ xi)

    return F


# ---------------------------------------------------------------------------
# changes of variables


def rotate(f: GridFunction, sigma: complex) -> GridFunction:
    """rho(sigma) f(w, s) = f(sigma w, s) for f on the grid (x, y, s) of H^1."""
    if f.ndim != 3:
        raise ValueError("rotation acts on functions over H^1 (three axes)")
    if not math.isclose(abs(sigma), 1.0, abs_tol=1e-12):
        raise ValueError("sigma must have modulus 1")
    x, y, s = f.mesh()
    w = sigma * (x + 1j * y)
    return f.with_values(f.sampler()(w.real, w.imag, s))


def dilate_plane(f: GridFunction, l1: float, l2: float) -> GridFunction:
    """delta f(u, s) = f(l1 u, l2 s)."""
    if f.ndim != 2:
        raise ValueError("dilation acts on functions over the plane")
    if not (l1 > 0 and l2 > 0):
        raise ValueError("dilation factors must be positive")
    u, s = f.mesh()
    return f.with_values(f.sampler()(l1 * u, l2 * s))


def shear_plane(f: GridFunction, a: float) -> GridFunction:
    """tau_a f(u, s) = f(u, s + a u)."""
    if f.ndim != 2:
        raise ValueError("shear acts on functions over the plane")
    u, s = f.mesh()
    return f.with_values(f.sampler()(u, s + a * u))


def reduction_conjugate(kind: str, params, f: GridFunction) -> GridFunction:
    """Apply one of the reducing changes of variables.

    kind="rotation": params = sigma (unit complex), f over H^1.
    kind="dilation": params = (l1, l2), f over the plane.
    kind="shear":    params = a, f over the plane.
    """
    if kind == "rotation":
        return rotate(f, complex(params))
    if kind == "dilation":
        l1, l2 = params
        return dilate_plane(f, float(l1), float(l2))
    if kind == "shear":
        return shear_plane(f, float(params))
    raise ValueError(f"unknown reduction {kind!r}")


# ---------------------------------------------------------------------------
# L^p ratios of the curve transform on H^1


@dataclass(frozen=True)
class GaussianBump:
    """exp(-(g - c)^T A (g - c) / 2) on H^1 in coordinates (x, y, s)."""

    center: np.ndarray
    cov: np.ndarray

    @property
    def precision(self) -> np.ndarray:
        return np.linalg.inv(self.cov)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        d = pts - self.center
        return np.exp(-0.5 * np.einsum("...i,ij,...j->...", d, self.precision, d))

    def lp_norm(self, p: float) -> float:
        return ((2 * math.pi / p) ** 1.5 * math.sqrt(np.linalg.det(self.cov))) ** (1.0 / p)

    @classmethod
    def random(cls, rng: np.random.Generator, scale: tuple[float, float] = (0.5, 1.5)) -> "GaussianBump":
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        sig = rng.uniform(*scale, size=3)
        return cls(rng.normal(scale=0.5, size=3), (q * sig**2) @ q.T)


def _right_translate_inverse(pts: np.ndarray, r: np.ndarray, z: complex, t: float):
    """Coordinates of g gamma(r)^{-1} for g = (x, y, s) rows and nodes r."""
    w = pts[..., 0] + 1j * pts[..., 1]
    s = pts[..., 2]
    w_new = w[:, None] - r[None, :] * z
    s_new = s[:, None] - r[None, :] ** 2 * t - 0.5 * r[None, :] * (w[:, None] * np.conj(z)).imag
    return np.stack([w_new.real, w_new.imag, s_new], axis=-1)


def curve_lp_ratio(z: complex, t: float, epsilon: float, exponents, bump: GaussianBump,
                   rng: np.random.Generator, samples: int = 4000, spread: float = 1.25,
                   chunk: int = 256) -> dict[float, tuple[float, float]]:
    """Monte-Carlo estimate of ||H f||_p / ||f||_p on H^1 for a Gaussian bump f.

    H is the right-translate curve transform of ``hilbert_curve_trunc``.  Output
    points are drawn as g = h gamma(r) with h ~ N(center, spread^2 cov) and
    log|r| uniform on the window with a random sign; the proposal density is
    evaluated with the same r-rule used for H.  Returns {p: (ratio, rel. stderr)}.
    """
    epsilon = _check_epsilon(epsilon)
    exponents = [float(p) for p in exponents]
    curve_speed = lambda r: abs(z) * 2.5 + 2 * r * abs(t)  # noqa: E731
    feature = 0.25 * math.sqrt(np.linalg.eigvalsh(bump.cov)[0])
    r, w = graded_pair_rule(epsilon, curve_speed, feature)
    if r.size == 0:
        return {p: (0.0, 0.0) for p in exponents}
    rr = np.concatenate([r, -r])
    ww = np.concatenate([w, -w])
    ell = -math.log(epsilon)
    proposal = GaussianBump(bump.center, spread**2 * bump.cov)
    norm_const = (2 * math.pi) ** -1.5 / math.sqrt(np.linalg.det(proposal.cov))

    # draw g = h gamma(r0)
    chol = np.linalg.cholesky(proposal.cov)
    h = proposal.center + rng.normal(size=(samples, 3)) @ chol.T
    r0 = np.exp(rng.uniform(-ell, ell, size=samples)) * rng.choice([-1.0, 1.0], size=samples)
    hw = h[:, 0] + 1j * h[:, 1]
    gw = hw + r0 * z
    gs = h[:, 2] + r0 * r0 * t + 0.5 * (hw * np.conj(r0 * z)).imag
    g = np.stack([gw.real, gw.imag, gs], axis=-1)

    vals = {p: [] for p in exponents}
    for lo in range(0, samples, chunk):
        pts = g[lo:lo + chunk]
        moved = _right_translate_inverse(pts, rr, z, t)
        hf = np.abs(np.sum(ww * bump(moved), axis=1))
        # density of g: average over r of the h-density at g gamma(r)^{-1};
        # log|r| uniform on (-ell, ell) with random sign gives dr/(4 ell |r|)
        q = norm_const * np.sum(np.abs(ww) * proposal(moved), axis=1) / (4 * ell)
        for p in exponents:
            vals[p].append(hf**p / q)
    out = {}
    for p in exponents:
        v = np.concatenate(vals[p])
        mean = float(np.mean(v))
        rel = float(np.std(v, ddof=1) / math.sqrt(v.size) / mean) if mean > 0 else math.inf
        out[p] = (mean ** (1.0 / p) / bump.lp_norm(p), rel / p)
    return out


def koranyi_unit_directions(rng: np.random.Generator, count: int,
                            band: tuple[float, float] = (math.pi / 8, 3 * math.pi / 8)):
    """Random (z, t) in H^1 with |z|^4 + t^2 = 1 and angle atan2(|t|, |z|^2) in ``band``."""
    theta = rng.uniform(*band, size=count)
    phase = rng.uniform(0, 2 * math.pi, size=count)
    sign = rng.choice([-1.0, 1.0], size=count)
    z = np.sqrt(np.cos(theta)) * np.exp(1j * phase)
    t = sign * np.sin(theta)
    return [(complex(a), float(b)) for a, b in zip(z, t)]


def curve_uniformity(epsilon: float, exponents=(2.0, 4.0), directions: int = 20, bumps: int = 5,
                     samples: int = 3000, seed: int = 0) -> dict[float, np.ndarray]:
    """Empirical norm ratios of the curve transform across Koranyi-unit directions.

    For each direction (z, t) the ratio is the largest ||H f||_p / ||f||_p over a
    fixed family of random Gaussian bumps, each estimated by ``curve_lp_ratio``.
    Returns {p: array of per-direction ratios}; max / min of an array is the
    spread across directions.
    """
    from .rng import batch_rng

    exponents = [float(p) for p in exponents]
    family_rng = batch_rng(seed, 0)
    family = [GaussianBump.random(family_rng) for _ in range(bumps)]
    dirs = koranyi_unit_directions(batch_rng(seed, 1), directions)
    out = {p: np.zeros(directions) for p in exponents}
    for d, (z, t) in enumerate(dirs):
        for i, bump in enumerate(family):
            est = curve_lp_ratio(z, t, epsilon, exponents, bump, batch_rng(seed, 2 + i), samples)
            for p in exponents:
                out[p][d] = max(out[p][d], est[p][0])
    return out
