"""The ten acceptance criteria at their stated tolerances, one line each."""

import pytest

from oscreduce import verify

from conftest import ACCEPTANCE_LINES

CRITERIA = verify.acceptance_checks()


def test_ten_criteria_registered():
    assert len(CRITERIA) == 10


@pytest.mark.parametrize("check", CRITERIA, ids=[c.name.split(":")[0].replace(" ", "_") for c in CRITERIA])
def test_criterion(check):
    result = check.run()
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
