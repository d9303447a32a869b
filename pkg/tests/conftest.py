import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hypwave.data import smooth_bump
from hypwave.grid import RadialField, RadialGrid, WaveState

settings.register_profile("hypwave", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hypwave")


def bump_field(grid, amplitude=1.0, radius=2.0, centre=0.0):
    r = grid.nodes
    return RadialField(grid, amplitude * smooth_bump((r - centre) / radius) + 0.0 * r)


def random_field(grid, rng, kmax=None):
    """Smooth random field: random sine series in ``w`` with decaying coefficients."""
    from hypwave.spectral import inverse_values
    kmax = kmax or min(grid.n - 1, 64)
    c = np.zeros(grid.n - 1)
    c[:kmax] = rng.standard_normal(kmax) / (1.0 + np.arange(kmax)) ** 2
    return RadialField(grid, inverse_values(grid, c))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_grid():
    return RadialGrid(8.0, 512)


@pytest.fixture
def bump_state(small_grid):
    u = bump_field(small_grid, 1.0, 1.5)
    return WaveState(u, bump_field(small_grid, 0.5, 1.5))
