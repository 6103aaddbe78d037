import numpy as np
import pytest

from harmex.harmonic_model import TestFunctionSpec
from harmex.quadrature import radial_grid

# the corpus spec type happens to match pytest's class naming pattern
TestFunctionSpec.__test__ = False


@pytest.fixture(scope="session")
def grid40():
    return radial_grid(40, 8)


@pytest.fixture(scope="session")
def grid24():
    return radial_grid(24, 8)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
