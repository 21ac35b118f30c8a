"""Delay embeddings and automatic selection of their parameters.

A scalar series x is turned into Q-dimensional state vectors

    row(s) = [x(s), x(s - lag), ..., x(s - (Q-1)*lag)]

with the newest sample first. Row t of the matrix corresponds to source
index s = base_offset + t, where base_offset = (Q-1)*lag; this convention
is shared by every consumer in the package.

Lag selection uses the first drop of the sample autocorrelation below a
threshold (default 1/e). Dimension selection uses the false-nearest-neighbor
test: a neighbor pair is false when adding one more coordinate either blows
up their distance ratio (ratio criterion) or separates them by a sizable
fraction of the attractor extent (amplitude criterion).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DataError,
    DimensionSaturationWarning,
    LagCapWarning,
    SeriesTooShort,
    ZeroVariance,
)
from .timeseries import TimeSeries

ACF_THRESHOLD_DEFAULT = 1.0 / np.e
FNN_TOLERANCE_DEFAULT = 0.005
FNN_RATIO_THRESHOLD = 15.0
FNN_AMPLITUDE_THRESHOLD = 2.0
FNN_SAMPLE_CAP = 4000


@dataclass(frozen=True)
class EmbeddingParams:
    """Delay-embedding parameters: lag (samples) and dimension."""

    lag: int
    dim: int

    def __post_init__(self):
        if self.lag < 1:
            raise DataError(f"lag must be >= 1, got {self.lag}")
        if self.dim < 1:
            raise DataError(f"dim must be >= 1, got {self.dim}")


@dataclass
class Embedding:
    """A sampled shadow manifold: one delay vector per row, newest first."""

    points: np.ndarray
    params: EmbeddingParams
    base_offset: int

    def __len__(self) -> int:
        return self.points.shape[0]


def delay_embed(series: TimeSeries, params: EmbeddingParams) -> Embedding:
    """Build the delay embedding of a scalar series.

    Raises SeriesTooShort unless len(series) > (dim-1)*lag.
    """
    values = series.values
    tau, q = params.lag, params.dim
    base = (q - 1) * tau
    n_rows = values.size - base
    if n_rows <= 0:
        raise SeriesTooShort(
            f"need more than {base} samples for lag={tau}, dim={q}; got {values.size}"
        )
    points = np.empty((n_rows, q))
    for j in range(q):
        start = base - j * tau
        points[:, j] = values[start:start + n_rows]
    return Embedding(points=points, params=params, base_offset=base)


def autocorrelation(values: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..max_lag, biased normalization.

    rho(l) = sum_t (x_t - m)(x_{t+l} - m) / sum_t (x_t - m)^2
    """
    centered = np.asarray(values, dtype=np.float64) - np.mean(values)
    denom = np.dot(centered, centered)
    if denom == 0.0:
        raise ZeroVariance("series is constant")
    n = centered.size
    # full linear autocorrelation via FFT, then truncate
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    spec = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    return acov / denom


def select_lag(
    series: TimeSeries,
    threshold: float = ACF_THRESHOLD_DEFAULT,
    max_lag: int | None = None,
) -> int:
    """Pick the smallest lag whose autocorrelation drops below ``threshold``.

    The search is capped at len(series) // 4 (or ``max_lag`` if smaller); when
    the cap is hit the cap itself is returned and a LagCapWarning is issued.
    """
    if not 0.0 < threshold < 1.0:
        raise DataError(f"threshold must be in (0, 1), got {threshold}")
    cap = len(series) // 4
    if max_lag is not None:
        cap = min(cap, int(max_lag))
    cap = max(cap, 1)
    rho = autocorrelation(series.values, cap)
    below = np.nonzero(rho[1:] < threshold)[0]
    if below.size == 0:
        warnings.warn(
            f"autocorrelation never dropped below {threshold:.4g}; lag capped at {cap}",
            LagCapWarning,
        )
        return cap
    return int(below[0]) + 1


def false_neighbor_fractions(
    series: TimeSeries,
    lag: int,
    max_dim: int,
    ratio_threshold: float = FNN_RATIO_THRESHOLD,
    amplitude_threshold: float = FNN_AMPLITUDE_THRESHOLD,
    theiler_window: int | None = None,
    sample_cap: int = FNN_SAMPLE_CAP,
) -> np.ndarray:
    """False-nearest-neighbor fraction for each dimension 1..max_dim.

    For dimension Q the test embeds at Q+1 and treats the newest coordinate
    x(s + lag) as the added one: each point's nearest neighbor (Euclidean,
    temporal exclusion ``theiler_window``, default = lag) is false when

        |new_i - new_j| / d_Q(i, j) > ratio_threshold        (ratio)
        sqrt(d_Q^2 + (new_i - new_j)^2) / std > amplitude_threshold

    The fraction is estimated over at most ``sample_cap`` evenly spaced rows.
    """
    values = series.values
    sigma = float(values.std())
    if sigma == 0.0:
        raise ZeroVariance("series is constant")
    if theiler_window is None:
        theiler_window = lag
    fractions = np.empty(max_dim)
    for q in range(1, max_dim + 1):
        lifted = delay_embed(series, EmbeddingParams(lag=lag, dim=q + 1))
        pts = lifted.points[:, 1:]
        new_coord = lifted.points[:, 0]
        n = pts.shape[0]
        if n < 2:
            raise SeriesTooShort(
                f"series too short to test dimension {q} at lag {lag}"
            )
        if n > sample_cap:
            sel = np.linspace(0, n - 1, sample_cap).astype(np.intp)
        else:
            sel = np.arange(n, dtype=np.intp)
        tree = cKDTree(pts)
        k = min(2 * theiler_window + 2, n)
        dists, nbrs = tree.query(pts[sel], k=k)
        if k == 1:
            dists = dists[:, None]
            nbrs = nbrs[:, None]
        n_false = 0
        n_used = 0
        for row, i in enumerate(sel):
            mask = np.abs(nbrs[row] - i) > theiler_window
            if not mask.any():
                continue
            j = nbrs[row][mask][0]
            d = dists[row][mask][0]
            n_used += 1
            d_new = abs(new_coord[i] - new_coord[j])
            if d == 0.0:
                is_false = d_new > 0.0
            else:
                is_false = (d_new / d) > ratio_threshold
            if not is_false:
                is_false = (np.hypot(d, d_new) / sigma) > amplitude_threshold
            n_false += is_false
        if n_used == 0:
            raise SeriesTooShort(
                f"no usable neighbor pairs at dimension {q} with lag {lag}"
            )
        fractions[q - 1] = n_false / n_used
    return fractions


def select_dimension_fnn(
    series: TimeSeries,
    lag: int,
    tolerance: float = FNN_TOLERANCE_DEFAULT,
    max_dim: int = 10,
    **fnn_kwargs,
) -> int:
    """Smallest dimension whose false-neighbor fraction is below ``tolerance``.

    Returns ``max_dim`` and issues a DimensionSaturationWarning when no
    dimension up to ``max_dim`` qualifies.
    """
    if not 0.0 < tolerance < 1.0:
        raise DataError(f"tolerance must be in (0, 1), got {tolerance}")
    fractions = false_neighbor_fractions(series, lag, max_dim, **fnn_kwargs)
    below = np.nonzero(fractions < tolerance)[0]
    if below.size == 0:
        warnings.warn(
            f"false-neighbor fraction stayed above {tolerance:.4g} up to "
            f"dimension {max_dim} (min reached: {fractions.min():.4g})",
            DimensionSaturationWarning,
        )
        return max_dim
    return int(below[0]) + 1
