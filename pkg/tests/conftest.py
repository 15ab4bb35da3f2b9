from __future__ import annotations

import pytest

from stripns.grid import SlipPair, StripGeometry, build_grid
from stripns.spectral import ShiftParams, solve_eigenpairs

# lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(StripGeometry(1.0), 31, 16)


@pytest.fixture(scope="session")
def mid_grid():
    return build_grid(StripGeometry(1.0), 63, 32)


@pytest.fixture(scope="session")
def small_basis(small_grid):
    slip = SlipPair(-1.0, 0.5)
    return solve_eigenpairs(8, small_grid, slip, 1.0, ShiftParams.from_slip(slip, 1.0))
