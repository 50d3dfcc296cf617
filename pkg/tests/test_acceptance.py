"""All ten acceptance criteria at the desk profile.

Each test prints one PASS/FAIL line; the lines are repeated in the terminal
summary so they appear in captured runs as well.
"""
import sys

import pytest

from sphere_interp.checks import SUITES, Context, run_check

RESULTS = []


@pytest.fixture(scope="module")
def ctx():
    return Context(profile="desk")


@pytest.mark.slow
@pytest.mark.parametrize("name", list(SUITES))
def test_criterion(ctx, name):
    res = run_check(name, ctx)
    line = res.line()
    RESULTS.append(line)
    sys.__stdout__.write("\n" + line + "\n")
    sys.__stdout__.flush()
    failed = [f"{p.name}={p.value:.3e} >= {p.threshold:.3g}" for p in res.parts if not p.passed]
    assert not failed, "; ".join(failed)
