import math

import numpy as np
import pytest

from grushin_riesz.grid import lp_norm
from grushin_riesz.sweep import (
    SweepConfig,
    dimension_sweep,
    estimate_norm_lower_bound,
    flatness,
    grid_hash,
    random_test_function,
    trial_seed,
)


@pytest.mark.parametrize("family", ["gaussian-hermite", "bump-mix"])
def test_test_function_is_real_normalized_and_reproducible(family):
    f = random_test_function(1, seed=5, family=family)
    g = random_test_function(1, seed=5, family=family)
    assert np.array_equal(f.values, g.values)
    assert np.all(f.values.imag == 0)
    assert lp_norm(f, 2, periodic_eta=family == "gaussian-hermite") == pytest.approx(1.0)


def test_unknown_family_and_axes_mismatch():
    with pytest.raises(ValueError):
        random_test_function(1, 0, family="noise")
    with pytest.raises(ValueError):
        random_test_function(2, 0, axes=((-1, 1, 5), (-1, 1, 6)))


def test_identity_operator_ratio_is_one():
    recs = estimate_norm_lower_bound("identity", 1, [2.0, 4.0], trials=2, seed=0)
    assert [r.estimate for r in recs] == pytest.approx([1.0, 1.0])


def test_l2_anchor_and_trial_nesting():
    recs = estimate_norm_lower_bound("riesz", 1, [2.0], trials=3, seed=1)
    assert recs[0].estimate == pytest.approx(math.sqrt(2), rel=0.01)
    assert trial_seed(1, 2) == trial_seed(1, 2) != trial_seed(1, 3)


def test_sweep_orders_records_and_reports_flatness():
    cfg = SweepConfig(dims=(2, 1), exponents=(4.0, 2.0), trials=1, seed=0)
    recs, failures = dimension_sweep(cfg)
    assert not failures
    assert [(r.n, r.p) for r in recs] == [(1, 2.0), (1, 4.0), (2, 2.0), (2, 4.0)]
    assert flatness(recs, 2.0) == pytest.approx(1.0, abs=0.01)


def test_failed_cell_is_reported_not_raised():
    recs, failures = dimension_sweep(SweepConfig(dims=(1, 9), trials=1))
    assert [r.n for r in recs] == [1]
    assert failures and failures[0].startswith("n=9")


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(trials=0)
    with pytest.raises(ValueError):
        SweepConfig(exponents=(1.0,))
    with pytest.raises(ValueError):
        SweepConfig(epsilon=2.0)


def test_grid_hash_is_stable():
    assert grid_hash(((-1, 1, 5),)) == grid_hash(((-1.0, 1.0, 5),))
    assert grid_hash(((-1, 1, 5),)) != grid_hash(((-1, 1, 6),))
