import numpy as np
import pytest

from skewkrylov import SparseSkewMatrix, SssOperator


@pytest.fixture
def rot2():
    """The 2 x 2 rotation generator S = [[0, 1], [-1, 0]]."""
    return SparseSkewMatrix.from_dense([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture
def sys2(rot2):
    """A = I + S with b = e1; solution (0.5, 0.5)."""
    return SssOperator(1.0, rot2), np.array([1.0, 0.0])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
