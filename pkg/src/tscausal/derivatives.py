"""Time-derivative estimation and tangent-vector assembly.

The tangent vector attached to an embedding row is the delay embedding of
the scalar derivative with the same (lag, dim): differentiating

    row(s) = [x(s), x(s - lag), ...]

coordinate-wise gives [x'(s), x'(s - lag), ...].

Three estimators are provided: first-order forward differences, second-order
central differences (one-sided second-order stencils at the ends, so length
is preserved), and a Savitzky-Golay filter for noisy data (local polynomial
least squares; the terminal windows are evaluated off-center, again
preserving length).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .embedding import Embedding, EmbeddingParams, delay_embed
from .errors import AlignmentMismatch, InvalidFilterConfig, SeriesTooShort
from .timeseries import TimeSeries

DERIVATIVE_SCHEMES = ("forward", "central", "savgol")


@dataclass
class VectorFieldSamples:
    """Tangent-vector estimates, row-aligned with an Embedding."""

    vectors: np.ndarray
    method_tag: str

    def __len__(self) -> int:
        return self.vectors.shape[0]


def derivative_series(series: TimeSeries, scheme: str = "central") -> TimeSeries:
    """Finite-difference derivative of a scalar series.

    forward: d(t) = (x(t+1) - x(t)) / dt, one sample shorter.
    central: d(t) = (x(t+1) - x(t-1)) / (2 dt), with second-order one-sided
    stencils at both ends so the length is preserved.
    """
    x = series.values
    dt = series.dt
    if scheme == "forward":
        if x.size < 2:
            raise SeriesTooShort("forward differences need at least 2 samples")
        return TimeSeries((x[1:] - x[:-1]) / dt, dt, name=series.name)
    if scheme == "central":
        if x.size < 3:
            raise SeriesTooShort("central differences need at least 3 samples")
        d = np.empty_like(x)
        d[1:-1] = (x[2:] - x[:-2]) / (2.0 * dt)
        d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt)
        d[-1] = (3.0 * x[-1] - 4.0 * x[-2] + x[-3]) / (2.0 * dt)
        return TimeSeries(d, dt, name=series.name)
    raise InvalidFilterConfig(f"unknown scheme {scheme!r}")


def savgol_derivative(series: TimeSeries, window: int = 5, polyorder: int = 2) -> TimeSeries:
    """Savitzky-Golay first-derivative estimate, length preserving."""
    if window % 2 == 0 or window < 3:
        raise InvalidFilterConfig(f"window must be odd and >= 3, got {window}")
    if not 0 < polyorder < window:
        raise InvalidFilterConfig(
            f"polyorder must be in [1, window), got {polyorder} with window {window}"
        )
    if len(series) < window:
        raise SeriesTooShort(f"need at least {window} samples, got {len(series)}")
    d = savgol_filter(
        series.values, window_length=window, polyorder=polyorder,
        deriv=1, delta=series.dt, mode="interp",
    )
    return TimeSeries(d, series.dt, name=series.name)


def estimate_derivative(
    series: TimeSeries,
    scheme: str = "central",
    savgol_window: int = 5,
    savgol_polyorder: int = 2,
) -> TimeSeries:
    """Dispatch over the supported derivative schemes."""
    if scheme == "savgol":
        return savgol_derivative(series, savgol_window, savgol_polyorder)
    return derivative_series(series, scheme)


def vector_field_for_embedding(
    deriv: TimeSeries, params: EmbeddingParams, method_tag: str = "central"
) -> VectorFieldSamples:
    """Delay-embed a derivative series into tangent-vector samples.

    The derivative series must share the source series' time origin and dt;
    the same (lag, dim) and base-offset convention then makes row t the
    tangent vector at row t of the embedding (up to truncation to the common
    length when a scheme shortened the series).
    """
    emb = delay_embed(deriv, params)
    return VectorFieldSamples(vectors=emb.points, method_tag=method_tag)


def align_pair(
    embedding: Embedding, field: VectorFieldSamples
) -> tuple[np.ndarray, np.ndarray]:
    """Truncate an (embedding, field) pair to their common row range.

    Both were built with the same base-offset convention, so row t refers to
    the same time index in each; only the tail lengths can differ (forward
    differences drop the last sample).
    """
    if embedding.points.shape[1] != field.vectors.shape[1]:
        raise AlignmentMismatch(
            f"embedding is {embedding.points.shape[1]}-dimensional but field "
            f"is {field.vectors.shape[1]}-dimensional"
        )
    n = min(embedding.points.shape[0], field.vectors.shape[0])
    return embedding.points[:n], field.vectors[:n]
