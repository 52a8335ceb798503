import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from loopmech.algebra import basis

E = np.eye(8)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def e(i):
    return basis(i)


def im(i):
    """Imaginary unit ``e_i`` as 7 algebra coordinates."""
    return np.eye(8)[i][1:]


_coeff = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
octonions = arrays(np.float64, 8, elements=_coeff)
algebra_vectors = arrays(np.float64, 7, elements=_coeff)


@st.composite
def unit_octonions(draw):
    x = draw(octonions)
    n = np.linalg.norm(x)
    if n < 1e-3:
        x = np.eye(8)[draw(st.integers(0, 7))]
        n = 1.0
    return x / n


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
