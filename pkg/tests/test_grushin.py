import math

import numpy as np
import pytest

from grushin_riesz.grid import GridFunction, lp_norm
from grushin_riesz.grushin import (
    apply_grushin_riesz,
    apply_grushin_riesz_mc,
    eta_fourier_slices,
    eta_transform,
    half_offset_frequencies,
    inverse_eta_transform,
    riesz_box,
    slices_to_grid,
    vector_riesz_magnitude,
)
from grushin_riesz.hermite import BasisSpec, SpectralField
from grushin_riesz.spectral import apply_riesz, apply_truncated_riesz
from grushin_riesz.sweep import random_test_function

AXES = ((-8.0, 8.0, 97), (-16.0, 16.0, 64))


def _field():
    return random_test_function(1, seed=2, axes=AXES)


def test_frequencies_are_half_offset_and_symmetric():
    lams, length = half_offset_frequencies((-1.0, 1.0, 8))
    assert length == pytest.approx(8 * 2 / 7)
    assert np.allclose(lams, -lams[::-1])
    assert np.all(lams != 0)


def test_eta_transform_roundtrip_and_gaussian_pair():
    axis = (-20.0, 20.0, 256)
    eta = np.linspace(*axis)
    g = np.exp(-eta**2 / 2)
    lams, hat = eta_transform(g, axis)
    # int exp(i lam eta) exp(-eta^2/2) d eta = sqrt(2 pi) exp(-lam^2 / 2)
    assert np.allclose(hat, math.sqrt(2 * math.pi) * np.exp(-lams**2 / 2), atol=1e-12)
    assert np.allclose(inverse_eta_transform(hat, axis), g, atol=1e-12)


def test_slices_roundtrip():
    f = _field()
    back = slices_to_grid(eta_fourier_slices(f))
    # the per-slice degree keeps all but 1e-10 of the energy, i.e. ~1e-5 in amplitude
    assert np.max(np.abs(back.values - f.values)) < 1e-5 * np.max(np.abs(f.values))


def test_slice_energy_is_parseval():
    f = _field()
    s = eta_fourier_slices(f)
    # the field is antiperiodic in eta, so its energy is taken over one period
    assert s.energy() == pytest.approx(lp_norm(f, 2, periodic_eta=True) ** 2, rel=1e-9)


@pytest.mark.parametrize("raising", [True, False])
@pytest.mark.parametrize("eps", [None, 0.3])
def test_riesz_box_matches_sparse_route(raising, eps):
    rng = np.random.default_rng(0)
    box = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    lam = 0.9
    spec = BasisSpec(2, lam, 6)
    fld = SpectralField(spec, {a: box[a] for a in np.ndindex(box.shape)})
    sparse = (apply_riesz(fld, 1, not raising) if eps is None
              else apply_truncated_riesz(fld, 1, not raising, eps))
    dense = riesz_box(box, 1, lam, raising, eps)
    for a in np.ndindex(dense.shape):
        assert dense[a] == pytest.approx(sparse.get(a), abs=1e-14)


def test_real_input_gives_real_output_in_symmetric_convention():
    out = apply_grushin_riesz(_field(), 0)
    assert np.max(np.abs(out.values.imag)) < 1e-12 * np.max(np.abs(out.values.real))


def test_vector_magnitude_l2_identity():
    f = _field()
    ratio = lp_norm(vector_riesz_magnitude(f), 2, True) / lp_norm(f, 2, True)
    assert ratio == pytest.approx(math.sqrt(2), rel=1e-4)


def test_truncated_converges_to_full():
    f = _field()
    full = apply_grushin_riesz(f, 0)
    errs = [lp_norm(full.with_values(apply_grushin_riesz(f, 0, epsilon=e).values - full.values), 2)
            for e in (0.5, 0.1, 0.02)]
    assert errs[0] > errs[1] > errs[2]


def test_conventions_swap_raising_and_lowering_on_positive_slices():
    f = _field()
    total = {}
    for conv in ("symmetric", "representation"):
        parts = [apply_grushin_riesz(f, 0, star, convention=conv) for star in (False, True)]
        total[conv] = sum(lp_norm(g, 2, periodic_eta=True) ** 2 for g in parts)
    assert total["symmetric"] == pytest.approx(total["representation"], rel=1e-10)
    with pytest.raises(ValueError):
        apply_grushin_riesz(f, 0, convention="other")


def test_mc_reproducible_and_empty_window():
    f = _field()
    pts = np.array([[0.0, 0.0], [0.5, -1.0]])
    a = apply_grushin_riesz_mc(f, 0, False, 0.5, 500, seed=1, at=pts)
    b = apply_grushin_riesz_mc(f, 0, False, 0.5, 500, seed=1, at=pts)
    assert np.array_equal(a.values, b.values)
    zero = apply_grushin_riesz_mc(f, 0, False, 1.0, 500, seed=1, at=pts)
    assert np.all(zero.values == 0)
    with pytest.raises(ValueError):
        apply_grushin_riesz_mc(f, 0, False, 0.5, 0, seed=1, at=pts)


def test_two_dimensional_roundtrip():
    f = random_test_function(2, seed=1)
    back = slices_to_grid(eta_fourier_slices(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-5 * np.max(np.abs(f.values))
