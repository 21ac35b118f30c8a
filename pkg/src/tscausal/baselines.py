"""Comparison methods: bivariate Granger causality and k-NN mutual information.

Granger causality fits, per target, a restricted autoregression (own lags
only) and an unrestricted one (own plus the other series' lags) by least
squares and compares residual sums of squares with an F-test.

Mutual information uses the classical Kraskov-Stoegbauer-Grassberger
estimator (variant 1): Chebyshev-metric k-th-neighbor distances in the
joint space, strict-inequality neighbor counts in each marginal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma
from scipy.stats import f as f_dist

from .errors import (
    DegenerateDataWarning,
    SeriesTooShort,
    SingularDesign,
    TooFewSamples,
)
from .timeseries import TimeSeries

_JITTER_SCALE = 1e-10
_JITTER_SEED = 0x5EED


@dataclass
class GrangerResult:
    """F-test p-values for both directions at a fixed lag order."""

    p_xy: float
    p_yx: float
    lag_order: int
    f_xy: float
    f_yx: float


def _lagged_design(target: np.ndarray, other: np.ndarray, p: int):
    """Row t: [1, target lags 1..p, other lags 1..p], response target[t]."""
    n = target.size
    rows = n - p
    ones = np.ones((rows, 1))
    own = np.column_stack([target[p - j:n - j] for j in range(1, p + 1)])
    cross = np.column_stack([other[p - j:n - j] for j in range(1, p + 1)])
    return ones, own, cross, target[p:]


def _rss(design: np.ndarray, response: np.ndarray) -> float:
    coef, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < design.shape[1]:
        raise SingularDesign(
            f"lagged design is rank-deficient ({rank} < {design.shape[1]})"
        )
    resid = response - design @ coef
    return float(resid @ resid)


def _granger_one_direction(cause: np.ndarray, effect: np.ndarray, p: int):
    ones, own, cross, response = _lagged_design(effect, cause, p)
    rss_restricted = _rss(np.hstack([ones, own]), response)
    rss_unrestricted = _rss(np.hstack([ones, own, cross]), response)
    n_rows = response.size
    dof = n_rows - 2 * p - 1
    f_stat = max(rss_restricted - rss_unrestricted, 0.0) / p / (rss_unrestricted / dof)
    return f_stat, float(f_dist.sf(f_stat, p, dof))


def granger_f_test(x: TimeSeries, y: TimeSeries, max_lag: int = 5) -> GrangerResult:
    """Bivariate Granger F-test in both directions at lag order ``max_lag``.

    p_xy is the p-value for "x Granger-causes y" (x lags added to the
    autoregression of y), and p_yx the reverse.
    """
    if max_lag < 1:
        raise SeriesTooShort(f"max_lag must be >= 1, got {max_lag}")
    n = min(len(x), len(y))
    if n <= 3 * max_lag + 1:
        raise SeriesTooShort(
            f"need more than {3 * max_lag + 1} samples for lag order {max_lag}, got {n}"
        )
    xv = x.values[:n]
    yv = y.values[:n]
    f_xy, p_xy = _granger_one_direction(xv, yv, max_lag)
    f_yx, p_yx = _granger_one_direction(yv, xv, max_lag)
    return GrangerResult(p_xy=p_xy, p_yx=p_yx, lag_order=max_lag, f_xy=f_xy, f_yx=f_yx)


def _chebyshev_counts(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Number of points strictly within each row's radius (self excluded)."""
    tree = cKDTree(points)
    counts = tree.query_ball_point(
        points, np.nextafter(radii, 0.0), p=np.inf, return_length=True
    )
    return counts - 1


def ksg_mutual_information(A: np.ndarray, B: np.ndarray, k: int = 4) -> float:
    """KSG estimate (variant 1) of the mutual information I(A; B) in nats.

    Degenerate inputs (duplicate joint rows, or A identically equal to B)
    make neighbor counts ill-defined; they are broken by a deterministic
    jitter of relative scale 1e-10 and flagged with a DegenerateDataWarning.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[0] == 1:
        A = A.T
    if B.shape[0] == 1:
        B = B.T
    n = A.shape[0]
    if B.shape[0] != n:
        raise TooFewSamples(f"sample counts differ: {n} vs {B.shape[0]}")
    if n <= k + 1:
        raise TooFewSamples(f"need more than k+1={k + 1} samples, got {n}")

    joint = np.hstack([A, B])
    degenerate = (A.shape == B.shape and np.array_equal(A, B)) or (
        np.unique(joint, axis=0).shape[0] < n
    )
    if degenerate:
        warnings.warn(
            "duplicate or deterministically tied points; applying jitter",
            DegenerateDataWarning,
        )
        rng = np.random.default_rng(_JITTER_SEED)
        scale_a = _JITTER_SCALE * np.maximum(A.std(axis=0), 1.0)
        scale_b = _JITTER_SCALE * np.maximum(B.std(axis=0), 1.0)
        A = A + rng.standard_normal(A.shape) * scale_a
        B = B + rng.standard_normal(B.shape) * scale_b
        joint = np.hstack([A, B])

    joint_tree = cKDTree(joint)
    eps, _ = joint_tree.query(joint, k=k + 1, p=np.inf)
    eps = eps[:, k]
    n_a = _chebyshev_counts(A, eps)
    n_b = _chebyshev_counts(B, eps)
    return float(
        digamma(k) + digamma(n) - np.mean(digamma(n_a + 1) + digamma(n_b + 1))
    )


def mi_pushforward_score(U: np.ndarray, U_hat: np.ndarray, k: int = 4) -> float:
    """Mutual information between a vector field and its pushforward estimate."""
    return ksg_mutual_information(U, U_hat, k)
