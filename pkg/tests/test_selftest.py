import pytest

from eqspeed.selftest import CHECKS, run_selftest


def test_registry_populated():
    assert len(CHECKS) >= 15
    assert len({c.__name__ for c in CHECKS}) == len(CHECKS)


@pytest.mark.parametrize("seed", [0, 1])
def test_all_checks_pass(seed):
    results = run_selftest(seed=seed, verbose=False)
    failed = [(name, msg) for name, ok, msg in results if not ok]
    assert failed == []
