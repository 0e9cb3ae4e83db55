import math

import numpy as np
import pytest

from entarrow.hilbert import PureState, ket, tensor

LOG2 = math.log(2)

# Acceptance results are collected here and echoed in the terminal summary,
# one line per criterion, whether or not output capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def example_state() -> PureState:
    """``(|01> + |10>)/sqrt(2)`` on A, B with C in ``|0>``, as a 2x2x2 state."""
    bell = PureState.from_vector((ket(0, 1).amplitudes + ket(1, 0).amplitudes) / math.sqrt(2), (2, 2))
    return tensor([bell, ket(0)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_vector(rng, dim):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)
