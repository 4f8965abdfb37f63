import pytest

from kirchhoff_spectral import SpectralGrid


@pytest.fixture(scope="session")
def grid1():
    return SpectralGrid(1, 8)


@pytest.fixture(scope="session")
def grid1_small():
    return SpectralGrid(1, 4)


@pytest.fixture(scope="session")
def grid2():
    return SpectralGrid(2, 4)
