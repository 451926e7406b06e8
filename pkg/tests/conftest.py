import numpy as np
import pytest
import scipy.linalg

from skewkrylov import aslinearoperator, random_skew


def rotation_blocks(freqs):
    """blockdiag([[0, w], [-w, 0]] for w in freqs)."""
    return scipy.linalg.block_diag(*[np.array([[0.0, w], [-w, 0.0]]) for w in freqs])


def acceptance_instances():
    """The 20 instances shared by the acceptance suites."""
    out = []
    for i in range(20):
        n = (4, 8, 50, 200)[i % 4]
        density = (0.2, 1.0)[(i // 4) % 2]
        S = random_skew(n, density, seed=i)
        b = np.random.default_rng(1000 + i).standard_normal(n)
        out.append((f"n{n}-d{density}-s{i}", S, b))
    return out


@pytest.fixture
def rot2():
    return aslinearoperator(np.array([[0.0, 1.0], [-1.0, 0.0]]), "skew"), np.array([1.0, 0.0])


@pytest.fixture
def block4():
    return aslinearoperator(rotation_blocks([1.0, 2.0]), "skew"), np.array([1.0, 0.0, 1.0, 0.0])


@pytest.fixture(scope="session")
def skew50():
    S = random_skew(50, 0.2, seed=3)
    return S, np.random.default_rng(7).standard_normal(50)


@pytest.fixture(scope="session")
def skew200():
    S = random_skew(200, 0.2, seed=11)
    return S, np.random.default_rng(8).standard_normal(200)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
