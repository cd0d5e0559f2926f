import numpy as np
import pytest

from oldroydb.grid import TorusGrid


@pytest.fixture(scope="session")
def grid2():
    return TorusGrid(2, 32)


@pytest.fixture(scope="session")
def grid2_big():
    return TorusGrid(2, 128)


@pytest.fixture(scope="session")
def grid3():
    return TorusGrid(3, 16)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
