import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def cofactor_det(m):
    """Laplace expansion along the first row; exponential time, used as an oracle."""
    m = np.asarray(m)
    n = m.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return m[0, 0]
    total = 0
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1) ** j * m[0, j] * cofactor_det(minor)
    return total


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
