"""Acceptance criteria at their stated tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion. Each check lives in :mod:`invlimit.harness.acceptance` so that
``invlimit verify`` runs the same code.
"""

import pytest

from invlimit.harness import acceptance as acc


def _report(res):
    print(res.line())
    assert res.passed, res.line()


@pytest.mark.parametrize("check", acc.ACCEPTANCE, ids=lambda c: c.__name__)
def test_acceptance(check):
    _report(check())


@pytest.mark.parametrize("check", acc.INVARIANTS, ids=lambda c: c.__name__)
def test_invariant(check):
    _report(check())
