"""Every acceptance criterion at its pinned tolerance; one PASS/FAIL line each."""

import pytest

from symmes import acceptance

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [c[0] for c in acceptance.CRITERIA], ids=[c[1].replace(" ", "_") for c in acceptance.CRITERIA])
def test_criterion(number):
    result = acceptance.run_criterion(number)
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line
