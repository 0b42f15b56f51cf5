import pytest

from grushin_riesz.verify import SUITES, run_suite


@pytest.mark.parametrize("suite", ["hermite", "riesz", "kernel"])
def test_fast_suites_pass(suite):
    checks = run_suite(suite, {"seed": 1})
    assert checks and all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


@pytest.mark.slow
def test_transfer_suite_passes():
    checks = run_suite("transfer", {})
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
    assert set(SUITES) == {"hermite", "riesz", "kernel", "transfer", "representation"}
