"""Acceptance suite: each criterion at its stated threshold, one printed line per criterion."""

import pytest

from pushforge.acceptance import CORRUPTIBLE, CRITERIA, run_all, run_suite

# The sum of n symmetric uniforms has zero third cumulant, so its W1 distance to N(0,1)
# falls like 1/n rather than 1/sqrt(n); the fitted C in C/sqrt(n) then shrinks by more than
# a factor 2 over n = 4..64 and criterion 8 cannot pass as stated.
BERRY_ESSEEN = pytest.mark.xfail(strict=True, reason="true rate is 1/n for symmetric summands")

CORRUPTION_TARGET = {"tent": 1, "space-filling": 2, "phi": 4, "box-muller": 7}


@pytest.fixture(scope="module")
def suite():
    results = run_all()
    return {r.number: r for r in results}


NUMBERS = [pytest.param(num, marks=BERRY_ESSEEN) if num == 8 else num for num, *_ in CRITERIA] + [10]


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(suite, number, capsys):
    result = suite[number]
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_every_criterion_reported(suite):
    assert sorted(suite) == list(range(1, 11))
    for r in suite.values():
        assert r.measured and r.threshold
        assert r.seconds < r.time_limit or not r.passed


@pytest.mark.parametrize("hook", CORRUPTIBLE)
def test_fault_injection_breaks_only_its_criterion(hook, capsys):
    target = CORRUPTION_TARGET[hook]
    bystander = 1 if target != 1 else 4
    results = {r.number: r for r in run_suite(corrupt=(hook,), only={target, bystander})}
    with capsys.disabled():
        print(f"\n[corrupt {hook}] " + results[target].line())
    assert not results[target].passed
    assert results[bystander].passed
