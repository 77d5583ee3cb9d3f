import math

import numpy as np
import pytest

from nbchannel.core import GridSpec


@pytest.fixture
def grid64():
    return GridSpec(math.pi, math.pi / 2, 63, 63)


@pytest.fixture
def grid_small():
    return GridSpec(1.3, 0.8, 15, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rand_field(rng, grid):
    return rng.standard_normal(grid.shape)


# One line per acceptance criterion, echoed in the terminal summary so the
# verdicts survive output capturing.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
