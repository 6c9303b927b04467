"""The seven acceptance criteria at their exact settings and time limits.

Each test prints one ``[PASS]``/``[FAIL] criterion N`` line, visible even
when pytest captures output.
"""

import pytest

from regulus.acceptance import CRITERIA
from regulus.twolocal import DEFAULT_SEED


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k}" for k in range(1, len(CRITERIA) + 1)])
def test_criterion(criterion, capsys):
    result = criterion(DEFAULT_SEED)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
    assert result.within_budget, f"took {result.seconds:.2f} s, limit {result.limit} s"
