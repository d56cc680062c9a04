"""The acceptance criteria, one test each, at their stated tolerances.

Every test prints a one-line PASS/FAIL summary; conftest repeats the lines
at the end of the run. The two simulation criteria take several minutes.
"""

import pytest

from dscm import acceptance

LINES = []


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.run_one(number)
    line = acceptance.format_line(result)
    LINES.append(line)
    print(line)
    assert result.passed, result.detail
    assert result.seconds <= result.budget, f"took {result.seconds:.1f}s, budget {result.budget}s"
