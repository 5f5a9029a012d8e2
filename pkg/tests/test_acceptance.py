"""Acceptance battery at verification scale, one test per criterion.

Runs every pinned-parameter criterion from ``bnls.acceptance`` and prints a
PASS/FAIL line with its headline numbers.  Tolerances live in the battery
itself; this module only asserts the aggregated flags.
"""

import pytest

from bnls.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("name", sorted(CRITERIA))
def test_criterion(name):
    report = run_criterion(name, scale="verify")
    status = "PASS" if report.passed else "FAIL"
    detail = ", ".join(f"{k}={v:.3g}" for k, v in sorted(report.scalars.items()))
    print(f"[{status}] {name} ({report.wall_clock:.1f}s) {detail}")
    failed = [k for k, v in report.flags.items() if not v]
    assert report.passed, f"{name}: failing flags {failed}; scalars {report.scalars}"
