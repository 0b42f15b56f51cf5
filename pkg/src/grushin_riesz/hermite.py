"""Scaled Hermite functions and the spectral calculus of H(lambda).

The basis is the orthonormal family

    Phi_alpha^lam(xi) = |lam|^{n/4} prod_j h_{alpha_j}(sqrt|lam| xi_j),

with h_k the normalized 1-d Hermite functions
h_k(x) = (2^k k! sqrt(pi))^{-1/2} H_k(x) exp(-x^2/2).  Phi_alpha^lam is an
eigenfunction of H(lam) = -Delta + lam^2 |xi|^2 with eigenvalue
(2|alpha| + n)|lam|.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Literal, Mapping, Sequence

import numpy as np
from scipy.special import roots_hermite

_RESCALE = 1e100
_LOG_RESCALE = math.log(_RESCALE)


class MultiIndex(tuple):
    """Non-negative integer multi-index alpha in N^n.

    Behaves as a plain tuple (hashable, usable as dict key).
    """

    def __new__(cls, entries: Iterable[int]):
        entries = tuple(int(a) for a in entries)
        if any(a < 0 for a in entries):
            raise ValueError(f"multi-index entries must be >= 0, got {entries}")
        return super().__new__(cls, entries)

    @property
    def order(self) -> int:
        """|alpha|, the sum of the entries."""
        return sum(self)

    def shift(self, j: int) -> "MultiIndex":
        """alpha + e_j."""
        out = list(self)
        out[j] += 1
        return MultiIndex(out)

    def lower(self, j: int) -> "MultiIndex":
        """alpha - e_j; only defined when alpha_j >= 1."""
        if self[j] < 1:
            raise ValueError(f"cannot lower entry {j} of {tuple(self)}")
        out = list(self)
        out[j] -= 1
        return MultiIndex(out)

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)})"


def multi_indices(n: int, max_degree: int) -> Iterator[MultiIndex]:
    """All alpha in N^n with |alpha| <= max_degree, graded then lexicographic."""
    for total in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            counts = [0] * n
            for c in combo:
                counts[c] += 1
            yield MultiIndex(counts)


@dataclass(frozen=True)
class BasisSpec:
    n: int
    lam: float
    max_degree: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be positive")
        if self.lam == 0 or not np.isfinite(self.lam):
            raise ValueError("lambda must be a finite nonzero real")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")

    @property
    def size(self) -> int:
        return math.comb(self.max_degree + self.n, self.n)

    def indices(self) -> list[MultiIndex]:
        return list(multi_indices(self.n, self.max_degree))

    def eigenvalue(self, alpha: Sequence[int]) -> float:
        return (2 * sum(alpha) + self.n) * abs(self.lam)

    def with_degree(self, max_degree: int) -> "BasisSpec":
        return BasisSpec(self.n, self.lam, max_degree)


@dataclass(frozen=True)
class SpectralField:
    """Finite expansion sum_alpha coeffs[alpha] Phi_alpha^lam."""

    spec: BasisSpec
    coeffs: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, val in self.coeffs.items():
            alpha = key if isinstance(key, MultiIndex) else MultiIndex(key)
            if len(alpha) != self.spec.n:
                raise ValueError(f"index {alpha} has wrong length for n={self.spec.n}")
            if alpha.order > self.spec.max_degree:
                raise ValueError(f"index {alpha} exceeds max_degree {self.spec.max_degree}")
            clean[alpha] = complex(val)
        object.__setattr__(self, "coeffs", clean)

    def norm(self) -> float:
        """L2 norm (Parseval in the orthonormal basis)."""
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def get(self, alpha: Sequence[int]) -> complex:
        return self.coeffs.get(MultiIndex(alpha), 0j)

    def to_vector(self) -> np.ndarray:
        return np.array([self.get(a) for a in self.spec.indices()], dtype=complex)

    @classmethod
    def from_vector(cls, spec: BasisSpec, vec: np.ndarray) -> "SpectralField":
        return cls(spec, dict(zip(spec.indices(), np.asarray(vec, dtype=complex))))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if self.spec.n != other.spec.n or self.spec.lam != other.spec.lam:
            raise ValueError("fields live in different bases")
        spec = self.spec.with_degree(max(self.spec.max_degree, other.spec.max_degree))
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0j) + v
        return SpectralField(spec, out)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "SpectralField":
        return SpectralField(self.spec, {k: c * v for k, v in self.coeffs.items()})


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor quadrature rule on R^n.

    ``weights`` are plain integration weights: sum_i w_i g(x_i) ~ int g.
    """

    nodes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    lambda_scale: float = 1.0

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.nodes)

    @classmethod
    def gauss_hermite(cls, n: int, lam: float, num_nodes: int) -> "QuadratureGrid":
        """Gauss-Hermite rule scaled to the Phi^lam basis.

        The weight exp(-x^2) is folded back into the plain weights, so a rule
        with m nodes integrates Phi_alpha Phi_beta exactly for
        alpha_j + beta_j <= 2m - 1.
        """
        x, w = roots_hermite(num_nodes)
        s = math.sqrt(abs(lam))
        # log-space keeps exp(x^2) finite for large node counts
        plain = np.exp(np.log(w) + x**2) / s
        return cls(tuple(x / s for _ in range(n)), tuple(plain for _ in range(n)), abs(lam))

    @classmethod
    def uniform(cls, axes: Sequence[tuple[float, float, int]]) -> "QuadratureGrid":
        """Uniform grid with trapezoid weights (spectrally accurate for decaying data)."""
        nodes, weights = [], []
        for lo, hi, count in axes:
            x = np.linspace(lo, hi, count)
            w = np.full(count, (hi - lo) / (count - 1))
            w[0] *= 0.5
            w[-1] *= 0.5
            nodes.append(x)
            weights.append(w)
        return cls(tuple(nodes), tuple(weights), 1.0)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.nodes, indexing="ij"))


def hermite_functions(kmax: int, x) -> np.ndarray:
    """h_0..h_kmax at x, shape (kmax + 1, *x.shape).

    Three-term recurrence on the normalized functions with the Gaussian
    factor carried separately in log form; the running values are rescaled
    whenever they exceed 1e100, so nothing overflows or underflows early.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    logscale = -0.5 * x * x
    g_prev = np.zeros_like(x)
    g = np.full_like(x, math.pi ** -0.25)
    out[0] = g * np.exp(logscale)
    for k in range(kmax):
        g_next = math.sqrt(2.0 / (k + 1)) * x * g - math.sqrt(k / (k + 1)) * g_prev
        g_prev, g = g, g_next
        big = np.abs(g) > _RESCALE
        if np.any(big):
            g = np.where(big, g / _RESCALE, g)
            g_prev = np.where(big, g_prev / _RESCALE, g_prev)
            logscale = logscale + np.where(big, _LOG_RESCALE, 0.0)
        with np.errstate(under="ignore"):
            out[k + 1] = g * np.exp(logscale)
    return out


def eval_hermite_1d(k: int, x):
    """Normalized Hermite function h_k(x)."""
    if k < 0:
        raise ValueError("degree must be >= 0")
    vals = hermite_functions(k, x)[k]
    return float(vals) if np.ndim(vals) == 0 else vals


def scaled_hermite_table(kmax: int, lam: float, xi) -> np.ndarray:
    """Rows |lam|^{1/4} h_k(sqrt|lam| xi), k = 0..kmax (1-d factors of Phi^lam)."""
    s = math.sqrt(abs(lam))
    return abs(lam) ** 0.25 * hermite_functions(kmax, s * np.asarray(xi, dtype=float))


def eval_phi(alpha: Sequence[int], lam: float, xi) -> float | np.ndarray:
    """Phi_alpha^lam(xi); ``xi`` has shape (..., n)."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    xi = np.asarray(xi, dtype=float)
    n = len(alpha)
    if xi.ndim == 0:
        xi = xi[None]
    if xi.shape[-1] != n:
        raise ValueError(f"point dimension {xi.shape[-1]} != len(alpha) {n}")
    val = np.ones(xi.shape[:-1])
    for j, a in enumerate(alpha):
        val = val * scaled_hermite_table(a, lam, xi[..., j])[a]
    return float(val) if val.ndim == 0 else val



def analyze(samples: np.ndarray, grid: QuadratureGrid, spec: BasisSpec) -> SpectralField:
    """Project tensor-grid samples onto {Phi_alpha^lam : |alpha| <= N}."""
    samples = np.asarray(samples)
    if grid.n != spec.n or samples.shape != grid.shape:
        raise ValueError(
            f"grid/spec mismatch: samples {samples.shape}, grid {grid.shape}, n={spec.n}"
        )
    dense = samples.astype(complex)
    for axis in range(spec.n):
        table = scaled_hermite_table(spec.max_degree, spec.lam, grid.nodes[axis])
        table = table * grid.weights[axis]
        # contract the leading physical axis; the new degree axis goes last
        dense = np.tensordot(dense, table, axes=([0], [1]))
    return SpectralField(spec, {a: dense[tuple(a)] for a in spec.indices()})


def synthesize(fld: SpectralField, points) -> np.ndarray:
    """sum_alpha coeffs[alpha] Phi_alpha^lam(point) at points of shape (P, n)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != fld.spec.n:
        raise ValueError("point dimension does not match field dimension")
    out = np.zeros(pts.shape[0], dtype=complex)
    if not fld.coeffs:
        return out
    kmax = max(max(a) for a in fld.coeffs)
    tables = [scaled_hermite_table(kmax, fld.spec.lam, pts[:, j]) for j in range(fld.spec.n)]
    for alpha, c in fld.coeffs.items():
        term = np.full(pts.shape[0], c, dtype=complex)
        for j, a in enumerate(alpha):
            term *= tables[j][a]
        out += term
    return out


def ladder_factor(alpha: Sequence[int], j: int, lam: float, kind: str) -> float:
    if kind == "creation":
        return math.sqrt((2 * alpha[j] + 2) * abs(lam))
    if kind == "annihilation":
        return math.sqrt(2 * alpha[j] * abs(lam))
    raise ValueError(f"unknown ladder kind {kind!r}")


def apply_ladder(
    fld: SpectralField, j: int, kind: Literal["creation", "annihilation"]
) -> SpectralField:
    """A_j (creation) or A_j^* (annihilation) in the Phi^lam basis.

    Creation raises max_degree to N + 1 instead of truncating.
    """
    n = fld.spec.n
    if not 0 <= j < n:
        raise ValueError(f"axis {j} out of range for n={n}")
    out: dict[MultiIndex, complex] = {}
    if kind == "creation":
        spec = fld.spec.with_degree(fld.spec.max_degree + 1)
        for alpha, c in fld.coeffs.items():
            out[alpha.shift(j)] = ladder_factor(alpha, j, fld.spec.lam, kind) * c
    elif kind == "annihilation":
        spec = fld.spec
        for alpha, c in fld.coeffs.items():
            if alpha[j] >= 1:
                out[alpha.lower(j)] = ladder_factor(alpha, j, fld.spec.lam, kind) * c
    else:
        raise ValueError(f"unknown ladder kind {kind!r}")
    return SpectralField(spec, out)


def apply_semigroup(fld: SpectralField, r: float) -> SpectralField:
    """exp(-r H(lam)): multiply coeff at alpha by exp(-(2|alpha| + n)|lam| r)."""
    if r < 0:
        raise ValueError("semigroup time must be >= 0")
    return SpectralField(
        fld.spec,
        {a: c * math.exp(-fld.spec.eigenvalue(a) * r) for a, c in fld.coeffs.items()},
    )


def gram_matrix(spec: BasisSpec, grid: QuadratureGrid) -> np.ndarray:
    """Gram matrix of the basis under the quadrature rule."""
    idx = spec.indices()
    tables = [
        scaled_hermite_table(spec.max_degree, spec.lam, grid.nodes[j]) * np.sqrt(grid.weights[j])
        for j in range(spec.n)
    ]
    # per-axis inner products, multiplied across axes
    axis_gram = [t @ t.T for t in tables]
    g = np.ones((len(idx), len(idx)))
    arr = np.array(idx)
    for j in range(spec.n):
        g *= axis_gram[j][np.ix_(arr[:, j], arr[:, j])]
    return g
