import pathlib

import numpy
import pytest

from tempoca import DiscoveryParams, TimeSeriesPanel


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: statistical checks over many seeds (deselect with -m 'not slow')")


@pytest.fixture
def data_dir():
    return pathlib.Path(__file__).parent / "data"


@pytest.fixture
def params():
    return DiscoveryParams()


def driven_pair(n, seed, coupling=0.9, noise=0.1, driver_ar=0.0):
    """X (column 0) drives Y (column 1): Y_t = coupling X_{t-1} + noise e_t."""
    rng = numpy.random.default_rng(seed)
    e = rng.standard_normal((n, 2))
    x = numpy.zeros(n)
    for t in range(1, n):
        x[t] = driver_ar * x[t - 1] + e[t, 0]
    y = numpy.zeros(n)
    y[1:] = coupling * x[:-1] + noise * e[1:, 1]
    return TimeSeriesPanel(("X", "Y"), numpy.column_stack([x, y]))


@pytest.fixture
def make_driven_pair():
    return driven_pair
