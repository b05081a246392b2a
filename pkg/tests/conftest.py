import numpy as np
import pytest

from radgas.elliptic import HalfLineGrid
from radgas.flux_model import RiemannData, flux_by_name


@pytest.fixture(scope="session")
def burgers():
    return flux_by_name("burgers")


@pytest.fixture(scope="session")
def quartic():
    return flux_by_name("quartic")


@pytest.fixture(scope="session")
def data_positive(burgers):
    # f'(u-) = 0.1 > 0
    return RiemannData.create(burgers, 0.1, 0.3)


@pytest.fixture(scope="session")
def data_zero(burgers):
    # f'(u-) = 0
    return RiemannData.create(burgers, 0.0, 1.0)


@pytest.fixture
def grid_small():
    return HalfLineGrid.from_length(513, 50.0)


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)
