"""Benchmark data generation and signal corruption.

The workhorse benchmark is a six-dimensional system whose first block
(z1..z3) is a time-scaled chaotic Rossler oscillator (a = b = 0.2, c = 5.7,
all rates multiplied by 6) driving, through a squared coupling of strength C
into the fifth equation, a classical Lorenz block (z4..z6; sigma=10, rho=28,
beta=8/3). At C=0 the blocks are independent and z4..z6 is exactly the
standard Lorenz system. Integration is fixed-step classical fourth-order
Runge-Kutta, compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DataError, Divergence, ZeroVariance
from .timeseries import TimeSeries

COORDINATE_NAMES = ("z1", "z2", "z3", "z4", "z5", "z6")
DIVERGENCE_LIMIT = 1.0e6

# initial-condition box for seeded starts, placed well inside both basins
# (the Rossler block escapes to infinity from some states with z3 < 0 or far
# off the band); transient integration then pulls onto the attractor
_IC_CENTER = np.array([0.0, -6.0, 0.1, 1.0, 1.0, 25.0])
_IC_SPREAD = np.array([2.0, 2.0, 0.1, 5.0, 5.0, 5.0])


def rossler_lorenz_rhs(state: np.ndarray, coupling: float) -> np.ndarray:
    """Right-hand side of the coupled Rossler-Lorenz equations."""
    z1, z2, z3, z4, z5, z6 = np.asarray(state, dtype=np.float64)
    c = float(coupling)
    return np.array([
        -6.0 * (z2 + z3),
        6.0 * (z1 + 0.2 * z2),
        6.0 * (0.2 + z3 * (z1 - 5.7)),
        10.0 * (z5 - z4),
        28.0 * z4 - z5 - z4 * z6 + c * z2 * z2,
        z4 * z5 - 8.0 * z6 / 3.0,
    ])


@njit(cache=True)
def _rhs(z, c, out):
    out[0] = -6.0 * (z[1] + z[2])
    out[1] = 6.0 * (z[0] + 0.2 * z[1])
    out[2] = 6.0 * (0.2 + z[2] * (z[0] - 5.7))
    out[3] = 10.0 * (z[4] - z[3])
    out[4] = 28.0 * z[3] - z[4] - z[3] * z[5] + c * z[1] * z[1]
    out[5] = z[3] * z[4] - 8.0 * z[5] / 3.0


@njit(cache=True)
def _integrate(z0, c, h, n_transient, stride, n_samples, limit):
    z = z0.copy()
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    out = np.empty((n_samples, 6))
    total = n_transient + stride * n_samples
    kept = 0
    for step in range(total):
        _rhs(z, c, k1)
        for i in range(6):
            tmp[i] = z[i] + 0.5 * h * k1[i]
        _rhs(tmp, c, k2)
        for i in range(6):
            tmp[i] = z[i] + 0.5 * h * k2[i]
        _rhs(tmp, c, k3)
        for i in range(6):
            tmp[i] = z[i] + h * k3[i]
        _rhs(tmp, c, k4)
        for i in range(6):
            z[i] = z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        done = step + 1 - n_transient
        if done > 0 and done % stride == 0:
            for i in range(6):
                if not np.isfinite(z[i]) or abs(z[i]) > limit:
                    return out, kept
            out[kept] = z
            kept += 1
    return out, kept


def rk4_step(f, state: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``d state / dt = f(state)``."""
    y = np.asarray(state, dtype=np.float64)
    k1 = np.asarray(f(y))
    k2 = np.asarray(f(y + 0.5 * dt * k1))
    k3 = np.asarray(f(y + 0.5 * dt * k2))
    k4 = np.asarray(f(y + dt * k3))
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class SimulationConfig:
    """Settings for one Rossler-Lorenz trajectory.

    ``dt_sample`` must be an integer multiple of ``dt_integrate``; the
    integrator runs at the fine step and keeps every multiple-th state after
    discarding ``transient_time`` time units. ``initial_state`` overrides the
    seeded random start.
    """

    coupling: float = 1.0
    dt_integrate: float = 0.001
    dt_sample: float = 0.05
    n_samples: int = 10_000
    transient_time: float = 50.0
    seed: int = 0
    initial_state: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.coupling < 0:
            raise DataError(f"coupling must be >= 0, got {self.coupling}")
        if self.dt_integrate <= 0 or self.dt_sample <= 0:
            raise DataError("integration and sampling steps must be positive")
        ratio = self.dt_sample / self.dt_integrate
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise DataError(
                f"dt_sample ({self.dt_sample}) must be a positive integer "
                f"multiple of dt_integrate ({self.dt_integrate})"
            )
        if self.n_samples < 1:
            raise DataError("n_samples must be >= 1")
        if self.transient_time < 0:
            raise DataError("transient_time must be >= 0")
        if self.initial_state is not None:
            state = np.asarray(self.initial_state, dtype=np.float64)
            if state.shape != (6,):
                raise DataError(f"initial_state must have 6 components, got {state.shape}")
            if not np.all(np.isfinite(state)):
                raise DataError("initial_state must be finite")
            self.initial_state = state

    @property
    def stride(self) -> int:
        return int(round(self.dt_sample / self.dt_integrate))


def initial_state_for_seed(seed: int) -> np.ndarray:
    """Deterministic random start in a box around the attractors."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xD1CE,)))
    return _IC_CENTER + _IC_SPREAD * rng.uniform(-1.0, 1.0, size=6)


def rk4_integrate(cfg: SimulationConfig) -> dict[str, TimeSeries]:
    """Integrate the coupled system; returns one TimeSeries per coordinate."""
    z0 = cfg.initial_state if cfg.initial_state is not None else initial_state_for_seed(cfg.seed)
    n_transient = int(round(cfg.transient_time / cfg.dt_integrate))
    out, kept = _integrate(
        z0, float(cfg.coupling), cfg.dt_integrate,
        n_transient, cfg.stride, cfg.n_samples, DIVERGENCE_LIMIT,
    )
    if kept < cfg.n_samples:
        raise Divergence(
            f"trajectory diverged after {kept} of {cfg.n_samples} samples "
            f"(coupling={cfg.coupling}, seed={cfg.seed})"
        )
    return {
        name: TimeSeries(out[:, i].copy(), cfg.dt_sample, name=name)
        for i, name in enumerate(COORDINATE_NAMES)
    }


def simulate_observables(cfg: SimulationConfig, x_name: str = "z2", y_name: str = "z4"):
    """Convenience: integrate and pull out the (x, y) observable pair."""
    series = rk4_integrate(cfg)
    return series[x_name], series[y_name]


def corrupt_additive_noise(
    series: TimeSeries, snr_db: float | None, seed: int = 0
) -> TimeSeries:
    """Add white Gaussian noise at a given signal-to-noise ratio (dB).

    Signal power is the sample variance. ``snr_db=None`` (or +inf) returns
    the input unchanged.
    """
    if snr_db is None or np.isinf(snr_db):
        return series
    power = float(np.var(series.values))
    if power == 0.0:
        raise ZeroVariance("cannot scale noise to a constant signal")
    noise_var = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xA01,)))
    noisy = series.values + np.sqrt(noise_var) * rng.standard_normal(len(series))
    return TimeSeries(noisy, series.dt, name=series.name)


def corrupt_sine(
    series: TimeSeries, relative_power_db: float | None, period: float = 2.0 * np.pi
) -> TimeSeries:
    """Add a sine wave whose power relative to the signal is given in dB.

    The sine has amplitude A with A^2/2 = signal_power * 10^(dB/10) and is
    evaluated on the series' own time grid. ``relative_power_db=None`` (or
    -inf) returns the input unchanged.
    """
    if period <= 0:
        raise DataError(f"period must be positive, got {period}")
    if relative_power_db is None or relative_power_db == -np.inf:
        return series
    power = float(np.var(series.values))
    if power == 0.0:
        raise ZeroVariance("cannot scale the sine to a constant signal")
    amplitude = np.sqrt(2.0 * power * 10.0 ** (relative_power_db / 10.0))
    corrupted = series.values + amplitude * np.sin(2.0 * np.pi * series.times / period)
    return TimeSeries(corrupted, series.dt, name=series.name)
