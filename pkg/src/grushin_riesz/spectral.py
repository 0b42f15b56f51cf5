"""Hermite-Riesz multipliers R_j(lam), R_j^*(lam) and their truncations.

R_j(lam) = A_j(lam) H(lam)^{-1/2} moves the coefficient at alpha to alpha + e_j
with factor sqrt((2 alpha_j + 2) / (2|alpha| + n)); R_j^*(lam) moves it to
alpha - e_j with factor sqrt(2 alpha_j / (2|alpha| + n)).  The truncated
transform restricts the semigroup integral

    H^{-1/2} = pi^{-1/2} int_0^inf exp(-r H) r^{-1/2} dr

to r in (eps^2, 1/eps^2), which multiplies each eigenmode by
erf(sqrt(nu)/eps) - erf(eps sqrt(nu)), nu = (2|alpha| + n)|lam|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.special import erf, erfc

from .hermite import MultiIndex, SpectralField, apply_ladder, apply_semigroup


@dataclass(frozen=True)
class TruncationWindow:
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def interval(self) -> tuple[float, float]:
        return self.epsilon**2, 1.0 / self.epsilon**2


def riesz_multiplier(alpha, j: int, n: int, star: bool = False) -> float:
    """Coefficient factor of R_j (or R_j^* when ``star``) at index alpha."""
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    denom = 2 * sum(alpha) + n
    if star:
        return math.sqrt(2 * alpha[j] / denom)
    return math.sqrt((2 * alpha[j] + 2) / denom)


def truncated_factor(nu, epsilon: float):
    """(1/sqrt(pi)) int_{eps^2 nu}^{nu/eps^2} e^{-u} u^{-1/2} du.

    Written as erf(b) - erf(a) for small arguments and erfc(a) - erfc(b) once
    a = eps sqrt(nu) is large, where the erf difference cancels.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("eigenvalue must be positive")
    a = epsilon * np.sqrt(nu)
    b = np.sqrt(nu) / epsilon
    out = np.where(a < 0.5, erf(b) - erf(a), erfc(a) - erfc(b))
    out = np.where(epsilon == 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _transport(fld: SpectralField, j: int, star: bool, epsilon: float | None) -> SpectralField:
    n = fld.spec.n
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    out: dict[MultiIndex, complex] = {}
    spec = fld.spec if star else fld.spec.with_degree(fld.spec.max_degree + 1)
    for alpha, c in fld.coeffs.items():
        if star and alpha[j] == 0:
            continue
        factor = riesz_multiplier(alpha, j, n, star)
        if epsilon is not None:
            factor *= truncated_factor(fld.spec.eigenvalue(alpha), epsilon)
        target = alpha.lower(j) if star else alpha.shift(j)
        out[target] = out.get(target, 0j) + factor * c
    return SpectralField(spec, out)


def apply_riesz(fld: SpectralField, j: int, star: bool = False) -> SpectralField:
    """R_j(lam) f or R_j^*(lam) f for a spectral field f."""
    return _transport(fld, j, star, None)


def apply_truncated_riesz(
    fld: SpectralField, j: int, star: bool, window: TruncationWindow | float
) -> SpectralField:
    """R_j^eps(lam) f: apply_riesz with each mode damped by truncated_factor."""
    eps = window.epsilon if isinstance(window, TruncationWindow) else TruncationWindow(window).epsilon
    return _transport(fld, j, star, eps)


def truncation_error(
    fld: SpectralField, j: int, star: bool, window: TruncationWindow | float
) -> float:
    """||R_j^eps f - R_j f||_2, exact at the coefficient level."""
    eps = window.epsilon if isinstance(window, TruncationWindow) else TruncationWindow(window).epsilon
    n = fld.spec.n
    total = 0.0
    for alpha, c in fld.coeffs.items():
        if star and alpha[j] == 0:
            continue
        m = riesz_multiplier(alpha, j, n, star)
        tail = 1.0 - truncated_factor(fld.spec.eigenvalue(alpha), eps)
        total += (m * tail * abs(c)) ** 2
    return math.sqrt(total)


def semigroup_factor_quadrature(nu: float, epsilon: float) -> float:
    """Independent check of truncated_factor by adaptive quadrature in r.

    Integrates exp(-r nu) r^{-1/2} over (eps^2, 1/eps^2) and rescales by
    sqrt(nu / pi), which is the mode factor relative to nu^{-1/2}.
    """
    lo, hi = epsilon**2, 1.0 / epsilon**2
    if lo >= hi:
        return 0.0
    # substitute r = v^2 so the integrand is smooth at the lower end
    a, b = math.sqrt(lo), math.sqrt(hi)
    knee = 1.0 / math.sqrt(nu)
    val, _ = quad(
        lambda v: 2.0 * math.exp(-nu * v * v),
        a,
        b,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
        points=[knee] if a < knee < b else None,
    )
    return val * math.sqrt(nu / math.pi)


def truncated_riesz_by_quadrature(
    fld: SpectralField, j: int, star: bool, window: TruncationWindow | float
) -> SpectralField:
    """R_j^eps f computed as A_j pi^{-1/2} int exp(-r H) f r^{-1/2} dr.

    The semigroup is integrated numerically over (eps^2, 1/eps^2) on the whole
    coefficient vector, and the ladder operator is applied afterwards, so this
    route shares nothing with truncated_factor.
    """
    eps = window.epsilon if isinstance(window, TruncationWindow) else TruncationWindow(window).epsilon
    spec = fld.spec
    if eps == 1.0:
        smoothed = fld.scale(0.0)
    else:
        # r = v^2 removes the r^{-1/2} singularity
        vec, _ = quad_vec(
            lambda v: 2.0 * apply_semigroup(fld, v * v).to_vector(),
            eps,
            1.0 / eps,
            epsabs=0.0,
            epsrel=1e-12,
            limit=400,
        )
        smoothed = SpectralField.from_vector(spec, vec / math.sqrt(math.pi))
    return apply_ladder(smoothed, j, "annihilation" if star else "creation")
