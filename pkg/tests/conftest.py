import math

import numpy as np
import pytest

from qpwind import GOLDEN_ALPHA, FourierPotential, amo_potential


def dense_h(pot, alpha, theta, n):
    """Dirichlet truncation as a dense matrix: diagonal v(theta + j alpha), j = 1..n."""
    j = np.arange(1, n + 1)
    H = np.diag(pot(theta + j * alpha)).astype(complex)
    H += np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    return H


def amo_zeros_qep(lam, alpha, E, n):
    """Zeros in z = e^{i theta} of det(E - H_n(theta)) for 2 lam cos, via a
    companion linearization of the quadratic pencil z (E - H_n)."""
    import scipy.linalg

    w = np.exp(1j * alpha * np.arange(1, n + 1))
    A2 = -lam * np.diag(w)
    A0 = -lam * np.diag(1 / w)
    T = np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    A1 = E * np.eye(n) - T
    Z, I = np.zeros((n, n)), np.eye(n)
    L = np.block([[Z, I], [-A0, -A1]])
    R = np.block([[I, Z], [Z, A2]])
    return scipy.linalg.eig(L, R, right=False)


def match_sets(a, b):
    """Largest distance after pairing each element of ``a`` with its nearest in ``b``."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


@pytest.fixture
def amo():
    return amo_potential(0.5)


@pytest.fixture
def alpha():
    return GOLDEN_ALPHA


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def trig3():
    # real trigonometric potential of degree 2
    return FourierPotential({0: 0.2, 1: 0.4 - 0.1j, -1: 0.4 + 0.1j, 2: 0.15j, -2: -0.15j})


LOG_GOLDEN_SQ = math.log((3 + math.sqrt(5)) / 2)
