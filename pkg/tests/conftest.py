import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def naive_permanent(A) -> complex:
    """O(n!) permutation sum, the reference for the Ryser kernels."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    return complex(sum(np.prod([A[i, s[i]] for i in range(n)]) for s in itertools.permutations(range(n))))


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def iterate_cycle_walk(n, coin, steps, start_vertex, start_dir):
    """Coin then shift on a (vertex, direction) amplitude array."""
    psi = np.zeros((n, 2), dtype=complex)
    psi[start_vertex, start_dir] = 1.0
    for _ in range(steps):
        psi = psi @ coin.T
        new = np.zeros_like(psi)
        for v in range(n):
            new[(v - 1) % n, 0] += psi[v, 0]
            new[(v + 1) % n, 1] += psi[v, 1]
        psi = new
    return psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
