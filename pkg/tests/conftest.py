import numpy as np
import pytest

from app.schemas import SecretKey
from app.security import derive_parameters, parse_key
from app.testimages import natural_image

KEY_HEX = "2b7e151628aed2a6abf7158809cf4f3c"

# Socek control word yielding the 1-based permutation [4, 6, 7, 1, 3, 8, 2, 5]
REFERENCE_CONTROL = 0xD123


@pytest.fixture(scope="session")
def key() -> SecretKey:
    return parse_key(KEY_HEX)


@pytest.fixture(scope="session")
def params(key):
    return derive_parameters(key)


@pytest.fixture(scope="session")
def small_image():
    return natural_image(64)


@pytest.fixture(scope="session")
def medium_image():
    return natural_image(128, seed=3)


@pytest.fixture(scope="session")
def large_image():
    return natural_image(512)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
