import numpy as np
import pytest

from ellqg.elliptic_core import EllipticParams

GENERIC_TAU = 0.1 + 1.1j
GENERIC_ETA = 0.137 + 0.02j
SITES4 = (0.05 + 0.02j, 0.31 + 0.07j, -0.22 + 0.02j, 0.17 - 0.05j)
W1, W2 = 0.21 + 0.1j, -0.37 + 0.04j


@pytest.fixture
def generic():
    return EllipticParams(GENERIC_TAU, GENERIC_ETA)


@pytest.fixture
def qkzb_params():
    return EllipticParams(0.3 + 1.1j, 0.07 + 0.01j, p=0.4 + 0.9j)


@pytest.fixture
def root_of_unity():
    """tau = i, eta = 1/8 (N = 4)."""
    return EllipticParams(1j, 1 / 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
