import numpy as np
import pytest

from nvphase.model import RotatingField, SpinConstants, StaticFields


@pytest.fixture
def consts():
    return SpinConstants()


@pytest.fixture
def fields():
    return StaticFields()


@pytest.fixture
def drive():
    return RotatingField()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)
