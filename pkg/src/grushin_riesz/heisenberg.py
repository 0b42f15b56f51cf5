"""Heisenberg group H^n: group law, heat kernels and the Schrodinger representation.

Conventions: points are (z, t) with z = x + iy in C^n, the product is

    (z, t)(w, s) = (z + w, t + s + Im(z . conj(w)) / 2),

which is the law under which

    pi_lam(x + iy, t) phi(xi) = exp(i lam t) exp(i lam (x.xi + x.y/2)) phi(xi + y)

is a homomorphism.  The heat kernel is handled through its partial Fourier
transform in t,

    q_s(z, lam) = (4 pi)^{-n} (lam / sinh(lam s))^n exp(-lam coth(lam s) |z|^2 / 4),

and p_s(z, t) = (1/pi) int_0^inf q_s(z, lam) cos(lam t) dlam (q is even in lam).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_hermite

from .hermite import BasisSpec, QuadratureGrid, SpectralField, analyze, synthesize
from .rng import batch_rng

_SERIES_CUTOFF = 1e-4
_FAR_T = 60.0


@dataclass(frozen=True)
class HeisenbergPoint:
    z: np.ndarray
    t: float

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.ndim != 1:
            raise ValueError("z must be a vector")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.z.size

    @property
    def x(self) -> np.ndarray:
        return self.z.real

    @property
    def y(self) -> np.ndarray:
        return self.z.imag

    @classmethod
    def identity(cls, n: int) -> "HeisenbergPoint":
        return cls(np.zeros(n, dtype=complex), 0.0)

    @classmethod
    def from_real(cls, x, y, t) -> "HeisenbergPoint":
        return cls(np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float), t)

    def inverse(self) -> "HeisenbergPoint":
        return HeisenbergPoint(-self.z, -self.t)

    def __mul__(self, other: "HeisenbergPoint") -> "HeisenbergPoint":
        return group_mul(self, other)

    def allclose(self, other: "HeisenbergPoint", tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.z, other.z, atol=tol) and abs(self.t - other.t) <= tol)


@dataclass(frozen=True)
class KernelParams:
    n: int
    s: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if not self.s > 0:
            raise ValueError("heat kernel time s must be > 0")


def group_mul(a: HeisenbergPoint, b: HeisenbergPoint) -> HeisenbergPoint:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    twist = 0.5 * np.imag(np.sum(a.z * np.conj(b.z)))
    return HeisenbergPoint(a.z + b.z, a.t + b.t + twist)


def koranyi_norm(p: HeisenbergPoint) -> float:
    r2 = float(np.sum(np.abs(p.z) ** 2))
    return (r2 * r2 + p.t * p.t) ** 0.25


def dilate(p: HeisenbergPoint, r: float) -> HeisenbergPoint:
    """delta_r(z, t) = (r z, r^2 t)."""
    return HeisenbergPoint(r * p.z, r * r * p.t)


# ---------------------------------------------------------------------------
# heat kernels


def _hyperbolic_ratios(lam, s: float):
    """(lam / sinh(lam s), lam coth(lam s)) with the lam -> 0 limit by series."""
    lam = np.abs(np.asarray(lam, dtype=float))
    x = lam * s
    small = x < _SERIES_CUTOFF
    if not np.any(small):
        h = np.exp(-x)
        inv = 1.0 / (1.0 - h * h)
        return 2.0 * lam * h * inv, lam * (1.0 + h * h) * inv
    xs = np.where(small, 1.0, x)
    h = np.exp(-xs)
    inv = 1.0 / (1.0 - h * h)
    sinh_ratio = np.where(small, (1.0 - x * x / 6.0) / s, 2.0 * lam * h * inv)
    coth_ratio = np.where(small, (1.0 + x * x / 3.0) / s, lam * (1.0 + h * h) * inv)
    return sinh_ratio, coth_ratio


def q_kernel(z, lam, params: KernelParams):
    """q_s(z, lam); ``z`` has shape (..., n) and broadcasts against ``lam``."""
    z = np.asarray(z)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    sr, cr = _hyperbolic_ratios(lam, params.s)
    val = (4.0 * math.pi) ** (-params.n) * sr**params.n * np.exp(-0.25 * cr * r2)
    return float(val) if np.ndim(val) == 0 else val


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _composite_gl(upper: float, panels: int, order: int = 8):
    key = (panels, order)
    if key not in _GL_CACHE:
        x, w = leggauss(order)
        edges = np.linspace(0.0, 1.0, panels + 1)
        h = np.diff(edges)
        nodes = (edges[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)).ravel()
        weights = (0.5 * h[:, None] * w[None, :]).ravel()
        _GL_CACHE[key] = (nodes, weights)
    nodes, weights = _GL_CACHE[key]
    return nodes * upper, weights * upper


def _lambda_integrals(r2: np.ndarray, t: np.ndarray, params: KernelParams, want_derivs: bool):
    """Cosine/sine transforms in lam giving p, (1/r) dp/dr and dp/dt.

    The lam variable is rescaled per point by the decay rate
    kappa = n s + |z|^2 / 4 of q, and the number of Gauss-Legendre panels is
    raised in powers of two for points whose oscillation t / kappa would
    otherwise be under-resolved.
    """
    n, s = params.n, params.s
    kappa = n * s + 0.25 * r2
    upper = 45.0 + 5.0 * n
    # beyond |t| = 60 kappa the kernel and its derivatives are below exp(-60 pi)
    far = np.abs(t) > _FAR_T * kappa
    t = np.where(far, 0.0, t)
    freq = np.abs(t) / kappa * upper
    # at most ~1 radian of phase per node keeps 8-point panels well inside their exact range
    level = np.maximum(0, np.ceil(np.log2(np.maximum(freq / 256.0, 1e-300)))).astype(int)
    p = np.empty_like(t)
    dr = np.empty_like(t) if want_derivs else None
    dt = np.empty_like(t) if want_derivs else None
    for lev in np.unique(level):
        idx = np.flatnonzero(level == lev)
        u, w = _composite_gl(upper, 32 * 2**int(lev))
        chunk = max(1, 2_000_000 // u.size)
        for start in range(0, idx.size, chunk):
            sel = idx[start:start + chunk]
            k = kappa[sel][:, None]
            lam = u[None, :] / k
            sr, cr = _hyperbolic_ratios(lam, s)
            q = (4.0 * math.pi) ** (-n) * sr**n * np.exp(-0.25 * cr * r2[sel][:, None])
            phase = lam * t[sel][:, None]
            c = np.cos(phase)
            wq = w[None, :] / k / math.pi * q
            p[sel] = np.sum(wq * c, axis=1)
            if want_derivs:
                dr[sel] = np.sum(wq * (-0.5 * cr) * c, axis=1)
                dt[sel] = -np.sum(wq * lam * np.sin(phase), axis=1)
    p[far] = 0.0
    if want_derivs:
        dr[far] = 0.0
        dt[far] = 0.0
    return p, dr, dt


def _split(z, t):
    z = np.asarray(z)
    t = np.asarray(t, dtype=float)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    r2, t = np.broadcast_arrays(r2, t)
    return r2, t


def p_kernel(p: HeisenbergPoint | np.ndarray, params: KernelParams, t=None):
    """Heat kernel p_s(z, t) by lam-quadrature of q_s.

    Accepts a HeisenbergPoint, or arrays ``z`` (..., n) and ``t`` (...).
    """
    if isinstance(p, HeisenbergPoint):
        z, t = p.z, p.t
    else:
        z = p
    r2, tt = _split(z, t)
    shape = r2.shape
    val, _, _ = _lambda_integrals(r2.ravel().astype(float), tt.ravel().copy(), params, False)
    val = val.reshape(shape)
    return float(val) if val.ndim == 0 else val


def _panel_rule(upper: float, panels: int, order: int = 16):
    x, w = leggauss(order)
    edges = np.linspace(0.0, upper, panels + 1)
    h = np.diff(edges)
    return ((edges[:-1, None] + 0.5 * h[:, None] * (x + 1.0)).ravel(),
            (0.5 * h[:, None] * w).ravel())


def p_total_mass(params: KernelParams, rho_max: float = 14.0, t_max: float = 16.0,
                 panels: tuple[int, int] = (20, 32)) -> float:
    """int_{H^n} p_s dz dt by tensor Gauss-Legendre in (|z|, t >= 0).

    Uses radial symmetry in z and evenness in t; the t-decay is exp(-pi |t| / s).
    """
    n = params.n
    rho, wr = _panel_rule(rho_max * math.sqrt(params.s), panels[0])
    tt, wt = _panel_rule(t_max * params.s, panels[1])
    r2 = np.repeat(rho**2, tt.size)
    t = np.tile(tt, rho.size)
    vals, _, _ = _lambda_integrals(r2, t, params, False)
    sphere = 2 * math.pi**n / math.gamma(n)  # area of the unit sphere in R^{2n}
    weights = np.outer(wr * rho ** (2 * n - 1), wt).ravel()
    return float(2.0 * sphere * np.sum(weights * vals))


def p1_derivatives(z, t, n: int):
    """(p_1, (1/|z|) dp_1/d|z|, dp_1/dt) at arrays z (..., n), t (...).

    d/dx_j p_1 = x_j * radial and d/dy_j p_1 = y_j * radial.
    """
    r2, tt = _split(z, t)
    shape = r2.shape
    p, dr, dt = _lambda_integrals(r2.ravel().astype(float), tt.ravel().copy(), KernelParams(n), True)
    return p.reshape(shape), dr.reshape(shape), dt.reshape(shape)


def zgrad_p1(z, t, j: int):
    """(Z_j p_1, Z_j^* p_1) at arrays z (..., n), t (...).

    Z_j = i X_j + Y_j and Z_j^* = i X_j - Y_j with the fields
    X_j = d/dx_j - (y_j/2) d/dt and Y_j = d/dy_j + (x_j/2) d/dt.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    _, radial, dt = p1_derivatives(z, t, n)
    x, y = z[..., j].real, z[..., j].imag
    xp = x * radial - 0.5 * y * dt
    yp = y * radial + 0.5 * x * dt
    return 1j * xp + yp, 1j * xp - yp


def zbar_grad_p1(p: HeisenbergPoint, j: int, n: int | None = None) -> tuple[complex, complex]:
    if n is not None and n != p.n:
        raise ValueError("dimension mismatch")
    a, b = zgrad_p1(p.z[None, :], np.array([p.t]), j)
    return complex(a[0]), complex(b[0])


def xy_grad_p1(p: HeisenbergPoint, j: int) -> tuple[float, float]:
    """(X_j p_1, Y_j p_1) at a point."""
    _, radial, dt = p1_derivatives(p.z[None, :], np.array([p.t]), p.n)
    x, y = p.x[j], p.y[j]
    return float(x * radial[0] - 0.5 * y * dt[0]), float(y * radial[0] + 0.5 * x * dt[0])


# ---------------------------------------------------------------------------
# Schrodinger representation


def schrodinger_apply(p: HeisenbergPoint, lam: float, phi: Callable, xi) -> complex | np.ndarray:
    """(pi_lam(z, t) phi)(xi); ``phi`` maps points (..., n) to values."""
    xi = np.asarray(xi, dtype=float)
    x, y = p.x, p.y
    phase = lam * p.t + lam * (xi @ x + 0.5 * float(x @ y))
    return np.exp(1j * phase) * phi(xi + y)


def derivative_identity_residuals(z: np.ndarray, r: float, lam: float, phi: Callable, xi: np.ndarray, j: int,
                    h: float = 1e-5) -> tuple[float, float]:
    """Residuals of the two derivative identities for pi_lam(r z) phi.

    (i)  r d/dxi_j (pi phi) = (d/dy_j + i lam r^2 x_j / 2)(pi phi)
    (ii) i r lam xi_j pi phi = (d/dx_j - i lam r^2 y_j / 2)(pi phi)

    Derivatives in xi, x and y are central differences with step ``h``;
    returns the absolute residuals relative to max(1, |terms|).
    """
    z = np.asarray(z, dtype=complex)
    xi = np.asarray(xi, dtype=float)

    def F(zz, xx):
        return schrodinger_apply(HeisenbergPoint(r * zz, 0.0), lam, phi, xx)

    e = np.zeros(z.size)
    e[j] = 1.0
    val = F(z, xi)
    d_xi = (F(z, xi + h * e) - F(z, xi - h * e)) / (2 * h)
    d_y = (F(z + 1j * h * e, xi) - F(z - 1j * h * e, xi)) / (2 * h)
    d_x = (F(z + h * e, xi) - F(z - h * e, xi)) / (2 * h)
    x, y = z.real[j], z.imag[j]
    lhs1 = r * d_xi
    rhs1 = d_y + 0.5j * lam * r * r * x * val
    lhs2 = 1j * r * lam * xi[j] * val
    rhs2 = d_x - 0.5j * lam * r * r * y * val
    res1 = abs(lhs1 - rhs1) / max(1.0, abs(lhs1), abs(rhs1))
    res2 = abs(lhs2 - rhs2) / max(1.0, abs(lhs2), abs(rhs2))
    return float(res1), float(res2)


def semigroup_via_kernel(fld: SpectralField, r: float, z_nodes: int | None = None,
                         xi_nodes: int | None = None) -> SpectralField:
    """exp(-r^2 H(lam)) f computed as int_{C^n} pi_lam(r z) f q_1(z, -lam r^2) dz.

    The z-integral uses a tensor Gauss-Hermite rule adapted to the Gaussian
    factor of q_1; the result is sampled on Gauss-Hermite xi-nodes and
    re-analyzed in the Phi^lam basis of ``fld``.
    """
    if not r > 0:
        raise ValueError("r must be > 0")
    spec = fld.spec
    n, lam = spec.n, spec.lam
    if z_nodes is None:
        z_nodes = 96 if n == 1 else 2 * spec.max_degree + 12
    mu = -lam * r * r
    sr, cr = _hyperbolic_ratios(np.array(mu), 1.0)
    a = 0.25 * float(cr)
    pref = (4.0 * math.pi) ** (-n) * float(sr) ** n
    gx, gw = roots_hermite(z_nodes)
    gx = gx / math.sqrt(a)
    gw = gw / math.sqrt(a)
    # tensor rule over the 2n real coordinates of z
    mesh = np.meshgrid(*([gx] * (2 * n)), indexing="ij")
    wmesh = np.meshgrid(*([gw] * (2 * n)), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = pref * np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    xs, ys = coords[:, :n], coords[:, n:]

    m = xi_nodes or (2 * spec.max_degree + 2)
    grid = QuadratureGrid.gauss_hermite(n, lam, m)
    xi_pts = np.stack([g.ravel() for g in grid.mesh()], axis=-1)
    out = np.empty(xi_pts.shape[0], dtype=complex)
    for i, xi in enumerate(xi_pts):
        shifted = xi[None, :] + r * ys
        phase = lam * (r * xs @ xi + 0.5 * r * r * np.sum(xs * ys, axis=-1))
        vals = synthesize(fld, shifted)
        out[i] = np.sum(weights * np.exp(1j * phase) * vals)
    return analyze(out.reshape(grid.shape), grid, spec)


# ---------------------------------------------------------------------------
# kernel-measure moments


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    ess: float
    samples: int


def sample_heisenberg_proposal(rng: np.random.Generator, size: int, n: int,
                               z_var: float = 3.0):
    """Draw (z, t) from N(0, z_var I_2n) x Cauchy(0, 1 + |z|^2/4).

    Returns z (size, n), t (size,), and the proposal density at the draws.
    """
    xy = rng.normal(scale=math.sqrt(z_var), size=(size, 2 * n))
    z = xy[:, :n] + 1j * xy[:, n:]
    r2 = np.sum(xy * xy, axis=1)
    gamma = 1.0 + 0.25 * r2
    t = gamma * np.tan(math.pi * (rng.random(size) - 0.5))
    dens_z = (2 * math.pi * z_var) ** (-n) * np.exp(-0.5 * r2 / z_var)
    dens_t = gamma / (math.pi * (gamma * gamma + t * t))
    return z, t, dens_z * dens_t


def kernel_moment(p_exp: float, n: int, which: str = "radial", samples: int = 100_000,
                  seed: int = 0, batch_size: int = 50_000) -> MomentEstimate:
    """Importance-sampled int_{H^n} |x_1|^p |density| dz dt.

    ``which`` selects density (1/r) dp_1/dr ("radial") or dp_1/dt ("time").
    Absolute values are taken because both densities carry signs.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    if which not in ("radial", "time"):
        raise ValueError(f"which must be 'radial' or 'time', got {which!r}")
    if p_exp < 0:
        raise ValueError("moment exponent must be >= 0")
    vals = []
    done = 0
    batch = 0
    while done < samples:
        size = min(batch_size, samples - done)
        z, t, dens = sample_heisenberg_proposal(batch_rng(seed, batch), size, n)
        _, radial, dt = p1_derivatives(z, t, n)
        density = np.abs(radial if which == "radial" else dt)
        vals.append(np.abs(z[:, 0].real) ** p_exp * density / dens)
        done += size
        batch += 1
    w = np.concatenate(vals)
    total = np.sum(w)
    if total <= 0:
        raise FloatingPointError("degenerate proposal: zero effective sample size")
    ess = total**2 / np.sum(w * w)
    return MomentEstimate(float(np.mean(w)), float(np.std(w, ddof=1) / math.sqrt(w.size)),
                          float(ess), int(w.size))
