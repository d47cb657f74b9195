"""Acceptance gate: each criterion at its stated tolerance, one line per result."""

import pytest

from ncfun.acceptance import CRITERIA, run_criterion

_results = {}


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_criterion(criterion, capsys):
    result = run_criterion(criterion, seed=0)
    _results[result.number] = result
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


def test_all_criteria_ran():
    assert sorted(_results) == list(range(1, len(CRITERIA) + 1))
