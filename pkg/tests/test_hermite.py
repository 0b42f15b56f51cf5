import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite as phys

from grushin_riesz.hermite import (
    BasisSpec,
    MultiIndex,
    QuadratureGrid,
    SpectralField,
    analyze,
    apply_ladder,
    apply_semigroup,
    eval_hermite_1d,
    eval_phi,
    gram_matrix,
    hermite_functions,
    multi_indices,
    synthesize,
)


def _reference_h(k, x):
    c = np.zeros(k + 1)
    c[k] = 1.0
    return phys.hermval(x, c) * np.exp(-x * x / 2) / math.sqrt(2**k * math.factorial(k) * math.sqrt(math.pi))


@pytest.mark.parametrize("k", [0, 1, 4, 9, 15])
def test_hermite_function_matches_polynomial_form(k):
    x = np.linspace(-4, 4, 41)
    assert np.allclose(eval_hermite_1d(k, x), _reference_h(k, x), atol=1e-13)


def test_hermite_function_at_1p3():
    assert eval_hermite_1d(4, 1.3) == pytest.approx(_reference_h(4, 1.3), abs=1e-14)


def test_high_degree_far_tail_is_finite():
    vals = hermite_functions(200, np.array([0.0, 10.0, 25.0, 60.0]))
    assert np.all(np.isfinite(vals))
    assert abs(vals[200, 3]) < 1e-100


@pytest.mark.parametrize("n,N", [(1, 5), (2, 3), (3, 4)])
def test_multi_index_count(n, N):
    idx = list(multi_indices(n, N))
    assert len(idx) == math.comb(N + n, n)
    assert len(set(idx)) == len(idx)
    assert all(a.order <= N for a in idx)


def test_multi_index_rejects_negative_and_bad_lower():
    with pytest.raises(ValueError):
        MultiIndex([1, -1])
    with pytest.raises(ValueError):
        MultiIndex([0, 2]).lower(0)


def test_basis_spec_validation():
    with pytest.raises(ValueError):
        BasisSpec(1, 0.0, 3)
    with pytest.raises(ValueError):
        BasisSpec(0, 1.0, 3)


def test_field_rejects_index_above_degree():
    with pytest.raises(ValueError):
        SpectralField(BasisSpec(1, 1.0, 2), {(3,): 1.0})


@pytest.mark.parametrize("n,lam", [(1, 0.5), (2, -1.0), (3, 2.0)])
def test_gram_orthonormal(n, lam):
    spec = BasisSpec(n, lam, 6)
    g = gram_matrix(spec, QuadratureGrid.gauss_hermite(n, lam, 14))
    assert np.max(np.abs(g - np.eye(spec.size))) < 1e-12


def test_phi_eigenfunction_by_finite_differences():
    lam, alpha = 1.7, (3,)
    x = np.linspace(-2, 2, 9)
    h = 1e-4
    f = lambda s: eval_phi(alpha, lam, s[:, None])  # noqa: E731
    lap = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    lhs = -lap + lam**2 * x**2 * f(x)
    assert np.allclose(lhs, (2 * 3 + 1) * lam * f(x), atol=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5), st.floats(0.2, 3.0), st.integers(0, 2**31))
def test_analyze_inverts_synthesize(N, lam, seed):
    rng = np.random.default_rng(seed)
    spec = BasisSpec(2, lam, N)
    f = SpectralField.from_vector(spec, rng.normal(size=spec.size) + 1j * rng.normal(size=spec.size))
    grid = QuadratureGrid.gauss_hermite(2, lam, N + 2)
    pts = np.stack([m.ravel() for m in grid.mesh()], axis=-1)
    back = analyze(synthesize(f, pts).reshape(grid.shape), grid, spec)
    assert np.allclose(back.to_vector(), f.to_vector(), atol=1e-10)


def test_parseval_on_uniform_grid():
    spec = BasisSpec(1, 1.0, 6)
    rng = np.random.default_rng(0)
    f = SpectralField.from_vector(spec, rng.normal(size=spec.size))
    x = np.linspace(-12, 12, 801)
    vals = synthesize(f, x[:, None])
    assert math.sqrt(np.trapezoid(np.abs(vals) ** 2, x)) == pytest.approx(f.norm(), rel=1e-10)


def test_creation_raises_degree_and_annihilation_kills_ground_state():
    f = SpectralField(BasisSpec(2, 1.0, 2), {(2, 0): 1.0, (0, 0): 1.0})
    up = apply_ladder(f, 0, "creation")
    assert up.spec.max_degree == 3
    assert up.get((3, 0)) == pytest.approx(math.sqrt(6.0))
    down = apply_ladder(f, 0, "annihilation")
    assert set(down.coeffs) == {MultiIndex((1, 0))}
    with pytest.raises(ValueError):
        apply_ladder(f, 2, "creation")


def test_semigroup_multiplies_by_exponential():
    spec = BasisSpec(1, 2.0, 3)
    f = SpectralField(spec, {(k,): 1.0 for k in range(4)})
    g = apply_semigroup(f, 0.3)
    for k in range(4):
        assert g.get((k,)).real == pytest.approx(math.exp(-(2 * k + 1) * 2.0 * 0.3))
    with pytest.raises(ValueError):
        apply_semigroup(f, -1.0)


def test_field_addition_merges_degrees():
    a = SpectralField(BasisSpec(1, 1.0, 1), {(1,): 1.0})
    b = SpectralField(BasisSpec(1, 1.0, 3), {(3,): 2.0, (1,): 1.0})
    c = a + b
    assert c.spec.max_degree == 3
    assert c.get((1,)) == 2.0
    with pytest.raises(ValueError):
        a + SpectralField(BasisSpec(1, 2.0, 1), {})
