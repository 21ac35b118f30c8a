"""Uniformly sampled scalar time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesTooShort, DataError


@dataclass
class TimeSeries:
    """A uniformly sampled scalar signal.

    Parameters
    ----------
    values : array_like, shape (n,)
        Scalar samples. Must be finite and at least 2 long.
    dt : float
        Sampling interval (time units per sample), strictly positive.
    """

    values: np.ndarray
    dt: float
    name: str = field(default="", compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise DataError(f"expected 1-D samples, got shape {self.values.shape}")
        if self.values.size < 2:
            raise SeriesTooShort(f"need at least 2 samples, got {self.values.size}")
        if not np.all(np.isfinite(self.values)):
            raise DataError("series contains NaN or Inf")
        self.dt = float(self.dt)
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise DataError(f"dt must be a positive finite number, got {self.dt}")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        """Sample times t_i = i * dt, starting at 0."""
        return np.arange(self.values.size) * self.dt
