import numpy as np
import pytest

from qconvex.model import validate_and_symmetrize


def random_spec(rng, n, m, field="real", zero_v=False):
    A = rng.normal(size=(m, n, n))
    v = rng.normal(size=(m, n))
    if field == "complex":
        A = A + 1j * rng.normal(size=(m, n, n))
        v = v + 1j * rng.normal(size=(m, n))
    if zero_v:
        v = np.zeros_like(v)
    return validate_and_symmetrize(field, A, v)


def random_unitary(rng, n, field="real"):
    Z = rng.normal(size=(n, n))
    if field == "complex":
        Z = Z + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def make(A, v, field="real"):
    return validate_and_symmetrize(field, A, v)


@pytest.fixture
def scalar():
    """f(x) = x^2 - 2x."""
    return make([[[1.0]]], [[1.0]])


@pytest.fixture
def saddle():
    """A = diag(1, -1), v = (1, 0)."""
    return make([np.diag([1.0, -1.0])], [[1.0, 0.0]])


@pytest.fixture
def spike():
    """A1 = diag(1,-1), A2 = offdiag(1), v orthonormal; finite only at c = (1, 0)."""
    return make([np.diag([1.0, -1.0]), [[0.0, 1.0], [1.0, 0.0]]], np.eye(2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

