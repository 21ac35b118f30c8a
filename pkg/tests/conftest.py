import warnings
from functools import lru_cache

import numpy as np
import pytest

from tscausal.systems import SimulationConfig, rk4_integrate
from tscausal.timeseries import TimeSeries


@lru_cache(maxsize=32)
def _trajectory(coupling: float, seed: int, n_samples: int, dt_sample: float):
    cfg = SimulationConfig(
        coupling=coupling, seed=seed, n_samples=n_samples, dt_sample=dt_sample
    )
    return rk4_integrate(cfg)


@pytest.fixture(scope="session")
def benchmark_pair():
    """(x, y) = (z2, z4) of a coupled run at C=1, paper-default sampling."""
    series = _trajectory(1.0, 1, 10_000, 0.05)
    return series["z2"], series["z4"]


@pytest.fixture(scope="session")
def lorenz_long():
    """Clean Lorenz x-coordinate: 20 000 samples at dt=0.01 (z4 block at C=0)."""
    return _trajectory(0.0, 11, 20_000, 0.01)["z4"]


@pytest.fixture(scope="session")
def lorenz_block():
    """Full Lorenz block (z4, z5, z6) at C=0, default sampling."""
    series = _trajectory(0.0, 5, 10_000, 0.05)
    return series["z4"], series["z5"], series["z6"]


def trajectory(coupling, seed, n_samples=10_000, dt_sample=0.05):
    return _trajectory(coupling, seed, n_samples, dt_sample)


@pytest.fixture(autouse=True)
def _quiet_selection_warnings():
    """Parameter-selection warnings are expected all over the benchmark runs."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_series(values, dt=1.0, name=""):
    return TimeSeries(np.asarray(values, dtype=float), dt, name=name)
