import math

import numpy as np
import pytest

from grushin_riesz.grid import GridFunction
from grushin_riesz.heisenberg import HeisenbergPoint as P
from grushin_riesz.rng import batch_rng
from grushin_riesz.transfer import (
    CurveSpec,
    GaussianBump,
    curve_lp_ratio,
    graded_pair_rule,
    hilbert_curve_trunc,
    koranyi_unit_directions,
    log_pair_rule,
    reduction_conjugate,
    rotate,
    transferred,
    u_action,
)


def test_log_rule_integrates_dr_over_r():
    r, w = log_pair_rule(0.1, 256)
    assert np.sum(w) == pytest.approx(2 * math.log(10))
    assert r[0] == pytest.approx(0.1) and r[-1] == pytest.approx(10.0)
    assert log_pair_rule(1.0)[0].size == 0
    with pytest.raises(ValueError):
        log_pair_rule(0.0)


def test_graded_rule_integrates_dr_over_r():
    r, w = graded_pair_rule(0.1, lambda r: 3 * r, 0.1)
    assert np.sum(w) == pytest.approx(2 * math.log(10), rel=1e-6)
    assert np.all(np.diff(r) > 0)


def test_u_action_preserves_volume():
    rng = batch_rng(0, 0)
    p = P(rng.normal(size=2) + 1j * rng.normal(size=2), 0.3)
    x0 = np.concatenate([rng.normal(size=2), [0.7]])
    h = 1e-6
    jac = np.zeros((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        a = np.concatenate(u_action(p, (x0 + e)[:2], (x0 + e)[2]), axis=None)
        b = np.concatenate(u_action(p, (x0 - e)[:2], (x0 - e)[2]), axis=None)
        jac[:, k] = (a - b) / (2 * h)
    assert abs(np.linalg.det(jac)) == pytest.approx(1.0, abs=1e-8)


def test_left_transference_holds_away_from_origin():
    func = lambda xi, eta: np.exp(-np.sum(xi * xi, axis=-1) - 0.1 * eta**2)  # noqa: E731
    axes = ((-6.0, 6.0, 121), (-14.0, 14.0, 281))
    grid = GridFunction.from_function(lambda x, e: func(x[..., None], e), axes)
    from grushin_riesz.transfer import t_epsilon_apply

    curve = CurveSpec(P(np.array([0.4 - 0.3j]), 0.2), 0.5)
    xi, eta = np.array([0.2]), -0.4
    g = P(np.array([0.3 + 0.5j]), 0.6)
    xg, eg = u_action(g, xi, eta)
    lhs = t_epsilon_apply(grid, curve, at=(xg[None, :], np.array([eg])))[0]
    rhs = hilbert_curve_trunc(transferred(func, xi, eta), curve, g, side="left")
    assert abs(lhs - rhs) < 1e-4


def test_rotation_conjugation_on_group():
    # rho(sigma^{-1}) H_{(z,t)} rho(sigma) = H_{(sigma z, t)}
    bump = GaussianBump(np.array([0.2, -0.1, 0.3]), np.diag([0.6, 0.9, 1.2]))
    F = lambda w, s: bump(np.stack([w[..., 0].real, w[..., 0].imag, s], axis=-1))  # noqa: E731
    sigma = np.exp(0.7j)
    g = P(np.array([0.3 - 0.2j]), 0.1)
    z, t = 0.8 + 0.1j, 0.5
    rotated = lambda w, s: F(sigma * w, s)  # noqa: E731
    lhs = hilbert_curve_trunc(rotated, CurveSpec(P(np.array([z]), t), 0.3),
                              P(g.z / sigma, g.t))
    rhs = hilbert_curve_trunc(F, CurveSpec(P(np.array([sigma * z]), t), 0.3), g)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_grid_rotation_and_reduction_dispatch():
    axes = ((-5.0, 5.0, 51),) * 2 + ((-5.0, 5.0, 11),)
    f = GridFunction.from_function(lambda x, y, s: np.exp(-x * x - 2 * y * y - s * s), axes)
    g = rotate(f, 1j)
    x, y, s = f.mesh()
    assert np.allclose(g.values, np.exp(-y * y - 2 * x * x - s * s), atol=1e-3)
    assert np.allclose(reduction_conjugate("rotation", 1j, f).values, g.values)
    with pytest.raises(ValueError):
        rotate(f, 2.0)
    with pytest.raises(ValueError):
        reduction_conjugate("twist", 1.0, f)


def test_bump_norm_and_ratio_estimator():
    bump = GaussianBump(np.zeros(3), np.eye(3))
    assert bump.lp_norm(2) == pytest.approx(math.pi ** 0.75)
    est = curve_lp_ratio(0.7 + 0.2j, 0.4, 0.5, [2.0], bump, batch_rng(1, 0), samples=500)
    ratio, rel = est[2.0]
    assert 0 < ratio < 5 and 0 < rel < 0.2
    zero = curve_lp_ratio(0.7, 0.4, 1.0, [2.0], bump, batch_rng(1, 0))
    assert zero[2.0] == (0.0, 0.0)


def test_koranyi_directions_are_unit():
    for z, t in koranyi_unit_directions(batch_rng(0, 0), 10):
        assert abs(z) ** 4 + t * t == pytest.approx(1.0)
