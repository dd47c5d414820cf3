import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cyberinsure import ContractGrid, RiskFunctional, s1  # noqa: E402

S1_PREMIUMS = [5.0 * k for k in range(13)]
S1_COVERAGES = [0.0, 0.25, 0.5, 0.75, 1.0]


@pytest.fixture
def s1_grid():
    return ContractGrid.linear(S1_PREMIUMS, S1_COVERAGES)


@pytest.fixture
def s1_avar():
    return s1(RiskFunctional.avar(0.25))


@pytest.fixture
def s1_neutral():
    return s1(RiskFunctional.expectation())


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
