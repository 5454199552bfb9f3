import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_states(rng, n, d):
    x = rng.standard_normal((n, 2 * d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
