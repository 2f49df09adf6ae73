import numpy as np
import pytest

from sparsedom.space import build_grid_space
from sparsedom.operators import cz_family, hilbert_kernel


@pytest.fixture(scope="session")
def line_space():
    """1D grid, 257 sites on [-1, 1]."""
    return build_grid_space((1.0,), 2.0 ** -7, extent=1.0)


@pytest.fixture(scope="session")
def tiny_space():
    """1D grid, 65 sites on [-1, 1]; small enough for brute-force oracles."""
    return build_grid_space((1.0,), 2.0 ** -5, extent=1.0)


@pytest.fixture(scope="session")
def plane_space():
    """Isotropic 2D grid, 65 x 65 sites."""
    return build_grid_space((1.0, 1.0), 2.0 ** -5, extent=1.0)


@pytest.fixture(scope="session")
def parabolic_space():
    """Anisotropic 2D grid with dilation exponents (1, 2)."""
    return build_grid_space((1.0, 2.0), 2.0 ** -5, extent=1.0)


@pytest.fixture(scope="session")
def hilbert_line(line_space):
    return cz_family(line_space, hilbert_kernel())


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
