"""Exit gate: every acceptance criterion at its tolerance and runtime limit.

One line per criterion is printed (also under capture) with the worst
residual, its limit and the measured runtime.
"""

import pytest

from merotensor.acceptance import CRITERIA, ROUNDING_FLOOR
from merotensor.cartan import GlobalParams


def test_all_eight_criteria_are_registered():
    assert sorted(CRITERIA) == list(range(1, 9))
    assert ROUNDING_FLOOR == 1e-11


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = CRITERIA[number](GlobalParams())
    with capsys.disabled():
        print("\n" + result.line())
    for c in result.checks:
        assert c.status != "fail", f"{c.name}: {c.value:.3e} > {c.limit:.0e}"
    assert result.runtime < result.runtime_limit
    assert result.status == "pass"
