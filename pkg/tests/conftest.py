import math

import numpy as np
import pytest

from cliffordflow.critical import solve_clifford_state, solve_ground_state
from cliffordflow.grids import ReducedGrid

# acceptance lines collected by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def clifford_states():
    """Clifford states at eps = 0.05, N_s = 1024, for n = 2, 3, 4."""
    return {n: solve_clifford_state(n, 0.05, grid=ReducedGrid(n, "latitude_s", 1024)) for n in (2, 3, 4)}


@pytest.fixture(scope="session")
def ground_states():
    return {n: solve_ground_state(n, 0.05, grid=ReducedGrid(n, "latitude_alpha", 2048)) for n in (2, 3)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


HALF_PI = 0.5 * math.pi
