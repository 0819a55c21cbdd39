from __future__ import annotations

import numpy as np
import pytest

from sosfact.generators import random_valid
from sosfact.tensor import antisymmetrize


@pytest.fixture
def two_mode_h() -> np.ndarray:
    """Two-mode tensor built from the single raw element v[0,1,1,0] = 4."""
    v = np.zeros((2, 2, 2, 2))
    v[0, 1, 1, 0] = 4.0
    return antisymmetrize(v)


@pytest.fixture
def random_h():
    def make(n, seed=0):
        return random_valid(n, seed)

    return make


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
