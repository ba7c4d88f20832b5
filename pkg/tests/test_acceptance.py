"""Acceptance gate: every shipped claim, one pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v` to see the per-criterion
lines; each test exercises one criterion at its stated tolerance via the
same code path as `phivar acceptance`.
"""

import pytest

from phivar.acceptance import CRITERIA, DEFAULT_TOLERANCES


@pytest.mark.parametrize("name", [name for name, _ in CRITERIA])
def test_criterion(name):
    fn = dict(CRITERIA)[name]
    passed, measured = fn(dict(DEFAULT_TOLERANCES))
    print(f"{'PASS' if passed else 'FAIL'}  {name}")
    assert passed, f"criterion {name} failed: {measured}"
