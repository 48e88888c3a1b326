import numpy as np
import pytest

from torsionlab.models.random import random_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def instances():
    """Forty seeded random complexes with random forms."""
    g = np.random.default_rng(7)
    return [random_instance(g) for _ in range(40)]


def jordan_matrix(rng, spec, spread=0.3):
    """Matrix with prescribed Jordan structure ``[(eigenvalue, block size), ...]``, conjugated."""
    n = sum(m for _, m in spec)
    J = np.zeros((n, n), dtype=complex)
    i = 0
    for lam, m in spec:
        J[i:i + m, i:i + m] = lam * np.eye(m) + np.diag(np.ones(m - 1), 1)
        i += m
    P = np.eye(n) + spread * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2 * n)
    return P @ J @ np.linalg.inv(P)


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, text):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
