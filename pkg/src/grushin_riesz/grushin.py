"""Riesz transforms for the Grushin operator on grids over R^n x R.

A grid function f(xi, eta) is cut into frequency slices

    f^lam(xi) = int f(xi, eta) exp(i lam eta) deta,
    f(xi, eta) = (1/2 pi) int exp(-i lam eta) f^lam(xi) dlam,

using a discrete transform on the half-offset frequencies
lam_k = 2 pi (k + 1/2) / L, so no slice sits at lam = 0 (the data are
treated as antiperiodic in eta over the period L = M d_eta).  Each slice is
expanded in the scaled Hermite basis Phi^lam, transformed by a coefficient
multiplier and resynthesized.

Two sign conventions for lifting the per-slice operators are offered:

``"symmetric"``
    R_j acts as R_j(lam) (raising) and R_j^* as R_j^*(lam) (lowering) on
    every slice.  The multipliers are even in lam, so real input gives real
    output.
``"representation"``
    The lift produced by integrating T_eps against the derivatives of the
    heat kernel: for lam > 0, R_j acts as -R_j^*(lam) and R_j^* as -R_j(lam);
    for lam < 0, R_j acts as R_j(lam) and R_j^* as R_j^*(lam).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridFunction
from .heisenberg import sample_heisenberg_proposal, zgrad_p1
from .hermite import BasisSpec, MultiIndex, SpectralField, scaled_hermite_table
from .rng import batch_rng
from .spectral import truncated_factor

CONVENTIONS = ("symmetric", "representation")

#: trapezoid analysis is trusted while sqrt((2N + 3)|lam|) * d_xi stays below this
_RESOLUTION_LIMIT = 1.4
#: slices below this fraction of the total energy are treated as empty
_EMPTY_SLICE = 1e-24


# ---------------------------------------------------------------------------
# eta transform


def half_offset_frequencies(eta_axis: tuple[float, float, int]) -> tuple[np.ndarray, float]:
    """Frequencies lam_k = 2 pi (k + 1/2) / L, k = -M/2 .. M/2 - 1, and L."""
    lo, hi, m = eta_axis
    d = (hi - lo) / (m - 1)
    length = m * d
    k = np.arange(m) - m // 2
    return 2 * math.pi * (k + 0.5) / length, length


def eta_transform(values: np.ndarray, eta_axis: tuple[float, float, int]):
    """Slices f^{lam_k}(xi) along the last axis; returns (lambdas, slices[..., k])."""
    lo, hi, m = eta_axis
    d = (hi - lo) / (m - 1)
    lams, _ = half_offset_frequencies(eta_axis)
    idx = np.arange(m)
    twisted = values * np.exp(1j * math.pi * idx / m)
    # sum_m x_m exp(2 pi i k m / M) = M ifft(x)[k]
    spec = m * np.fft.ifft(twisted, axis=-1)
    spec = np.roll(spec, m // 2, axis=-1)  # reorder to k = -M/2 .. M/2 - 1
    return lams, d * np.exp(1j * lams * lo) * spec


def inverse_eta_transform(slices: np.ndarray, eta_axis: tuple[float, float, int]) -> np.ndarray:
    """f(xi, eta_m) = (1/L) sum_k exp(-i lam_k eta_m) f^{lam_k}(xi)."""
    lo, hi, m = eta_axis
    lams, length = half_offset_frequencies(eta_axis)
    spec = np.roll(slices * np.exp(-1j * lams * lo), -(m // 2), axis=-1)
    # sum_k y_k exp(-2 pi i k m / M) = fft(y)[m]; the half offset adds exp(-i pi m / M)
    out = np.fft.fft(spec, axis=-1) * np.exp(-1j * math.pi * np.arange(m) / m)
    return out / length


# ---------------------------------------------------------------------------
# sliced representation


def _trapezoid(axis: tuple[float, float, int]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi, c = axis
    x = np.linspace(lo, hi, c)
    w = np.full(c, (hi - lo) / (c - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def resolvable_degree(lam: float, spacing: float, cap: int) -> int:
    """Largest per-axis degree N <= cap whose raised output is resolved on the grid."""
    lam = abs(lam)
    n_max = int(math.floor(((_RESOLUTION_LIMIT / spacing) ** 2 / lam - 3) / 2))
    return max(min(n_max, cap), 0)


def _analyze_box(values: np.ndarray, tables: list[np.ndarray], weights: list[np.ndarray]) -> np.ndarray:
    dense = values
    for table, w in zip(tables, weights):
        dense = np.tensordot(dense, table * w, axes=([0], [1]))
    return dense


def _synthesize_box(coeffs: np.ndarray, tables: list[np.ndarray]) -> np.ndarray:
    dense = coeffs
    for table in tables:
        dense = np.tensordot(dense, table[: dense.shape[0]], axes=([0], [0]))
    return dense


@dataclass
class SlicedField:
    """Per-frequency Hermite coefficient boxes of a grid function.

    ``coeffs[k]`` is a dense array of shape (N_k + 1,) * n holding the
    coefficient of Phi_alpha^{lam_k} at index alpha (each alpha_j <= N_k).
    """

    lambdas: np.ndarray
    coeffs: list[np.ndarray]
    axes: tuple[tuple[float, float, int], ...]
    tail: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n(self) -> int:
        return len(self.axes) - 1

    @property
    def frequency_weight(self) -> float:
        """d lam / (2 pi) = 1 / L."""
        _, length = half_offset_frequencies(self.axes[-1])
        return 1.0 / length

    def degrees(self) -> list[int]:
        return [c.shape[0] - 1 for c in self.coeffs]

    def slice(self, k: int) -> SpectralField:
        """Slice k as a SpectralField (indices with every alpha_j <= N_k)."""
        box = self.coeffs[k]
        nk = box.shape[0] - 1
        spec = BasisSpec(self.n, float(self.lambdas[k]), self.n * nk)
        return SpectralField(spec, {MultiIndex(a): box[a] for a in np.ndindex(box.shape)})

    @property
    def slices(self) -> list[SpectralField]:
        return [self.slice(k) for k in range(len(self.lambdas))]

    def energy(self) -> float:
        """sum_k ||f^{lam_k}||^2 / L (equals ||f||^2 up to the recorded tails)."""
        return self.frequency_weight * float(sum(np.sum(np.abs(c) ** 2) for c in self.coeffs))


def eta_fourier_slices(f: GridFunction, max_degree: int = 24, tail_tol: float = 1e-10) -> SlicedField:
    """Slice along eta and expand each slice in the Phi^{lam_k} basis.

    The per-slice degree is the smallest N whose box captures all but
    ``tail_tol`` of the slice energy, capped by ``max_degree`` and by what the
    xi-grid resolves.  ``tail`` records the discarded energy fraction per slice.
    """
    n = f.ndim - 1
    if n < 1:
        raise ValueError("need at least one spatial axis")
    lams, hats = eta_transform(f.values, f.axes[-1])
    spacing = float(max(f.spacing[:-1]))
    xw = [_trapezoid(a) for a in f.axes[:-1]]
    vol_w = np.ones(())
    for _, w in xw:
        vol_w = np.multiply.outer(vol_w, w)
    energies = np.tensordot(np.abs(hats) ** 2, vol_w, axes=(list(range(n)), list(range(n))))
    # slices carrying only roundoff are dropped rather than expanded
    negligible = energies <= _EMPTY_SLICE * max(float(np.sum(energies)), np.finfo(float).tiny)
    coeffs, tails = [], []
    for k, lam in enumerate(lams):
        if negligible[k]:
            coeffs.append(np.zeros((1,) * n, dtype=complex))
            tails.append(0.0)
            continue
        energy = float(energies[k])
        cap = resolvable_degree(lam, spacing, max_degree)
        tables = [scaled_hermite_table(cap, lam, x) for x, _ in xw]
        box = _analyze_box(hats[..., k], tables, [w for _, w in xw])
        # energy captured by the box of per-axis degree <= N, for every N
        mag = np.abs(box) ** 2
        top = np.max(np.indices(box.shape), axis=0) if n > 1 else np.arange(cap + 1)
        captured = np.cumsum(np.bincount(top.ravel(), weights=mag.ravel(), minlength=cap + 1))
        tail = np.maximum(energy - captured, 0.0) / energy
        ok = np.nonzero(tail < tail_tol)[0]
        nk = int(ok[0]) if ok.size else cap
        coeffs.append(np.ascontiguousarray(box[(slice(0, nk + 1),) * n]))
        tails.append(float(tail[nk]))
    return SlicedField(lams, coeffs, f.axes, np.array(tails))


def slices_to_grid(sliced: SlicedField) -> GridFunction:
    """Resynthesize every slice on the xi-grid and invert the eta transform.

    Only slices with nonzero coefficients are synthesized; the inverse
    transform is then a dense sum over those slices, which for band-limited
    data is cheaper than a full-length FFT.
    """
    xs = [np.linspace(*a) for a in sliced.axes[:-1]]
    shape = tuple(a[2] for a in sliced.axes[:-1])
    active = [k for k, box in enumerate(sliced.coeffs) if np.any(box)]
    lo, hi, m = sliced.axes[-1]
    if not active:
        return GridFunction(np.zeros(shape + (m,), dtype=complex), sliced.axes)
    hats = np.empty(shape + (len(active),), dtype=complex)
    for i, k in enumerate(active):
        box, lam = sliced.coeffs[k], sliced.lambdas[k]
        tables = [scaled_hermite_table(box.shape[0] - 1, lam, x) for x in xs]
        hats[..., i] = _synthesize_box(box, tables)
    eta = np.linspace(lo, hi, m)
    phases = np.exp(-1j * np.outer(sliced.lambdas[active], eta)) * sliced.frequency_weight
    return GridFunction(hats @ phases, sliced.axes)


# ---------------------------------------------------------------------------
# per-slice multipliers on coefficient boxes


def _box_multiplier(shape: tuple[int, ...], j: int, lam: float, raising: bool,
                    epsilon: float | None) -> np.ndarray:
    n = len(shape)
    alpha = np.indices(shape)
    denom = 2 * alpha.sum(axis=0) + n
    top = 2 * alpha[j] + 2 if raising else 2 * alpha[j]
    m = np.sqrt(top / denom)
    if epsilon is not None:
        m = m * truncated_factor(denom * abs(lam), epsilon)
    return m


def riesz_box(box: np.ndarray, j: int, lam: float, raising: bool,
              epsilon: float | None = None) -> np.ndarray:
    """Dense counterpart of apply_riesz / apply_truncated_riesz on a coefficient box.

    ``raising`` selects R_j(lam) (alpha -> alpha + e_j); otherwise R_j^*(lam).
    The output box grows by one along every axis so all slices stay cubic.
    """
    n = box.ndim
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    m = _box_multiplier(box.shape, j, lam, raising, epsilon)
    out = np.zeros(tuple(s + 1 for s in box.shape), dtype=complex)
    if raising:
        dst = tuple(slice(1, s + 1) if a == j else slice(0, s) for a, s in enumerate(box.shape))
        out[dst] = m * box
    else:
        moved = (m * box)[tuple(slice(1, None) if a == j else slice(None) for a in range(n))]
        dst = tuple(slice(0, s - 1) if a == j else slice(0, s) for a, s in enumerate(box.shape))
        out[dst] = moved
    return out


def _lifted_action(lam: float, star: bool, convention: str) -> tuple[bool, float]:
    """(raising, sign) of the per-slice operator for R_j (or R_j^* when star)."""
    if convention == "symmetric":
        return (not star), 1.0
    if convention == "representation":
        if lam > 0:
            return star, -1.0
        return (not star), 1.0
    raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def riesz_sliced(sliced: SlicedField, j: int, star: bool = False, epsilon: float | None = None,
                 convention: str = "symmetric") -> SlicedField:
    """Apply R_j or R_j^* (optionally truncated) slice by slice."""
    out = []
    for lam, box in zip(sliced.lambdas, sliced.coeffs):
        raising, sign = _lifted_action(lam, star, convention)
        out.append(sign * riesz_box(box, j, lam, raising, epsilon))
    return SlicedField(sliced.lambdas, out, sliced.axes, sliced.tail)


def apply_grushin_riesz(f: GridFunction, j: int, star: bool = False, epsilon: float | None = None,
                        convention: str = "symmetric", max_degree: int = 24) -> GridFunction:
    """R_j f (or R_j^* f) on a grid: slice, multiply per slice, resynthesize.

    With ``epsilon`` the truncated transform R_j^eps is applied instead.
    """
    if epsilon is not None and not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    sliced = eta_fourier_slices(f, max_degree=max_degree)
    out = slices_to_grid(riesz_sliced(sliced, j, star, epsilon, convention))
    return out.with_values(out.values, transform="riesz-star" if star else "riesz", axis=j,
                           max_tail=float(np.max(sliced.tail, initial=0.0)))


def vector_riesz_magnitude(f: GridFunction, epsilon: float | None = None,
                           max_degree: int = 24) -> GridFunction:
    """(sum_j |R_j f|^2 + |R_j^* f|^2)^{1/2} pointwise."""
    sliced = eta_fourier_slices(f, max_degree=max_degree)
    total = np.zeros(f.shape)
    for j in range(f.ndim - 1):
        for star in (False, True):
            comp = slices_to_grid(riesz_sliced(sliced, j, star, epsilon))
            total += np.abs(comp.values) ** 2
    return f.with_values(np.sqrt(total), transform="vector")


# ---------------------------------------------------------------------------
# Monte-Carlo representation formula


@dataclass(frozen=True)
class MCResult:
    values: np.ndarray
    stderr: np.ndarray
    samples: int
    ess: float


def apply_grushin_riesz_mc(f: GridFunction, j: int, star: bool, epsilon: float, samples: int,
                           seed: int, at: np.ndarray | None = None,
                           batch_size: int = 20_000) -> MCResult:
    """Estimate R_j^eps f (representation convention) from the heat-kernel formula.

    The integral over (z, t, r) of T_eps-integrand times the kernel derivative
    Z_j p_1 (or its conjugate-type partner when ``star``) divided by sqrt(pi)
    is sampled jointly: (z, t) from the kernel-moment proposal, log r uniform
    on (log eps, -log eps), and each draw uses the antithetic pair +r, -r.
    ``at`` is an array of evaluation points (P, n + 1); defaults to the grid.
    Returns values and per-point standard errors.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    n = f.ndim - 1
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    pts = f.points() if at is None else np.atleast_2d(np.asarray(at, dtype=float))
    xi, eta = pts[:, :n], pts[:, n]
    if epsilon == 1.0:
        zero = np.zeros(pts.shape[0], dtype=complex)
        return MCResult(zero, np.zeros(pts.shape[0]), samples, float(samples))
    sample = f.sampler()
    ell = -math.log(epsilon)
    s1 = np.zeros(pts.shape[0], dtype=complex)
    s2 = np.zeros(pts.shape[0])
    wsum = wsq = 0.0
    done = batch = 0
    while done < samples:
        size = min(batch_size, samples - done)
        rng = batch_rng(seed, batch)
        z, t, dens = sample_heisenberg_proposal(rng, size, n)
        r = np.exp(rng.uniform(-ell, ell, size=size))
        kp, kstar = zgrad_p1(z, t, j)
        weight = (kstar if star else kp) * (2 * ell / math.sqrt(math.pi)) / dens
        wabs = np.abs(weight)
        wsum += float(np.sum(wabs))
        wsq += float(np.sum(wabs**2))
        x, y = z.real, z.imag
        tt = t + 0.5 * np.sum(x * y, axis=1)
        for lo in range(0, size, 2048):
            sl = slice(lo, lo + 2048)
            # rows are evaluation points, columns are draws
            rb = r[None, sl]
            shift = rb[..., None] * y[None, sl]  # (1, B, n)
            lift = rb * (xi @ x[sl].T)  # (P, B)
            drift = eta[:, None] + rb**2 * tt[None, sl]
            plus = sample(*(xi[:, None, i] + shift[..., i] for i in range(n)), drift + lift)
            minus = sample(*(xi[:, None, i] - shift[..., i] for i in range(n)), drift - lift)
            contrib = (plus - minus) * weight[None, sl]
            s1 += contrib.sum(axis=1)
            s2 += (np.abs(contrib) ** 2).sum(axis=1)
        done += size
        batch += 1
    if wsum == 0.0:
        raise FloatingPointError("zero effective sample size")
    mean = s1 / samples
    var = np.maximum(s2 / samples - np.abs(mean) ** 2, 0.0) * samples / max(samples - 1, 1)
    return MCResult(mean, np.sqrt(var / samples), samples, wsum**2 / wsq)


__all__ = [
    "CONVENTIONS",
    "MCResult",
    "SlicedField",
    "apply_grushin_riesz",
    "apply_grushin_riesz_mc",
    "eta_fourier_slices",
    "eta_transform",
    "half_offset_frequencies",
    "inverse_eta_transform",
    "riesz_box",
    "riesz_sliced",
    "slices_to_grid",
    "vector_riesz_magnitude",
]
