"""Cross maps between shadow manifolds and their Jacobians.

Three pieces live here:

- local Jacobians of the map Y-embedding -> X-embedding, estimated from the
  displacements of the k nearest neighbors (row-vector convention: a tangent
  row vector v maps as v @ J with J of shape (Q_y, Q_x));
- a Gaussian kernel ridge regressor with closed-form coefficients and an
  analytic Jacobian, plus a local-linear k-NN regressor with the same
  interface;
- the simplex-weighted k-NN predictor used by convergent cross mapping.

All neighbor searches are exact (k-d tree; brute force would give identical
results) and support Theiler exclusion: candidates within a temporal radius
of the query index are skipped so that trajectory-adjacent points do not
masquerade as geometric neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial import cKDTree

from .errors import (
    DataError,
    DegenerateNeighborhood,
    NotEnoughNeighbors,
    SingularGram,
)


@dataclass(frozen=True)
class KnnConfig:
    """Neighbor-search settings.

    ``k=None`` lets each consumer pick its default: Q_y + 1 for the simplex
    predictor, 4 * max(Q_x, Q_y) for local Jacobians. ``theiler_window`` is
    the temporal exclusion radius in samples; candidates j with
    |j - t| <= theiler_window are never returned for query index t.
    """

    k: int | None = None
    theiler_window: int = 0

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise DataError(f"k must be >= 1, got {self.k}")
        if self.theiler_window < 0:
            raise DataError(f"theiler_window must be >= 0, got {self.theiler_window}")


def jacobian_k_default(q_x: int, q_y: int) -> int:
    # keeps headroom above the K > max(Q_x, Q_y) requirement without
    # over-smoothing the local fits at high embedding dimensions
    return 2 * max(q_x, q_y) + 4


def theiler_knn(
    points: np.ndarray,
    k: int,
    theiler_window: int,
    query_points: np.ndarray | None = None,
    query_times: np.ndarray | None = None,
    point_times: np.ndarray | None = None,
    tree: cKDTree | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors with temporal exclusion.

    ``point_times`` / ``query_times`` give temporal indices of the searched
    points and queries (defaults: positions, i.e. searching an embedding
    against itself). Returns (distances, indices), each (n_queries, k); the
    indices point into ``points``.
    """
    n = points.shape[0]
    if point_times is None:
        point_times = np.arange(n)
    if query_points is None:
        query_points = points
        if query_times is None:
            query_times = point_times
    elif query_times is None:
        raise DataError("query_times is required for external query points")
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if tree is None:
        tree = cKDTree(points)

    def _as_2d(d, i):
        return (d[:, None], i[:, None]) if d.ndim == 1 else (d, i)

    def _take_first_valid(d, i, valid):
        order = np.argsort(~valid, axis=1, kind="stable")[:, :k]
        return np.take_along_axis(d, order, axis=1), np.take_along_axis(i, order, axis=1)

    k_eff = min(n, k + 2 * theiler_window + 1)
    dists, nbrs = _as_2d(*tree.query(query_points, k=k_eff))
    valid = np.abs(point_times[nbrs] - query_times[:, None]) > theiler_window
    short = np.nonzero(valid.sum(axis=1) < k)[0]
    if short.size and k_eff < n:
        # rare: exclusion ate too many candidates; re-query those rows fully
        d_full, n_full = _as_2d(*tree.query(query_points[short], k=n))
        v_full = np.abs(point_times[n_full] - query_times[short, None]) > theiler_window
        if np.any(v_full.sum(axis=1) < k):
            raise NotEnoughNeighbors(
                f"need {k} neighbors outside the exclusion window "
                f"({theiler_window}) but the search set has only {n} points"
            )
        out_d, out_i = _take_first_valid(dists, nbrs, valid)
        out_d[short], out_i[short] = _take_first_valid(d_full, n_full, v_full)
        return out_d, out_i
    if short.size:
        raise NotEnoughNeighbors(
            f"need {k} neighbors outside the exclusion window "
            f"({theiler_window}) but the search set has only {n} points"
        )
    return _take_first_valid(dists, nbrs, valid)


def _min_norm_lstsq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least squares via SVD; supports leading batch axes."""
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    eps = np.finfo(np.float64).eps
    cutoff = np.max(s, axis=-1, keepdims=True) * max(a.shape[-2:]) * eps
    s_inv = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    utb = np.swapaxes(u, -1, -2) @ b
    return np.swapaxes(vt, -1, -2) @ (s_inv[..., None] * utb)


def knn_local_jacobian(
    X: np.ndarray, Y: np.ndarray, t: int, cfg: KnnConfig, tree: cKDTree | None = None
) -> np.ndarray:
    """Local Jacobian of the cross map at row t from neighbor displacements.

    Finds the k nearest neighbors tau_1..tau_k of Y[t] (Theiler-excluded),
    forms displacement stacks dY = Y[tau] - Y[t] and dX = X[tau] - X[t], and
    returns the minimum-norm least-squares solution J of dY @ J = dX, shaped
    (Q_y, Q_x) so that a tangent row vector v pushes forward as v @ J.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    q_x, q_y = X.shape[1], Y.shape[1]
    k = cfg.k if cfg.k is not None else jacobian_k_default(q_x, q_y)
    if k <= max(q_x, q_y):
        raise DataError(f"k must exceed max(Q_x, Q_y) = {max(q_x, q_y)}, got {k}")
    _, nbrs = theiler_knn(
        Y, k, cfg.theiler_window,
        query_points=Y[t][None], query_times=np.array([t]), tree=tree,
    )
    idx = nbrs[0]
    d_y = Y[idx] - Y[t]
    d_x = X[idx] - X[t]
    if not np.any(d_y):
        raise DegenerateNeighborhood(f"all neighbor displacements vanish at t={t}")
    return _min_norm_lstsq(d_y, d_x)


def local_jacobians(
    X: np.ndarray,
    Y: np.ndarray,
    cfg: KnnConfig,
    library: np.ndarray | None = None,
    queries: np.ndarray | None = None,
) -> np.ndarray:
    """Local Jacobians at every query row; batched knn_local_jacobian.

    ``library`` restricts the neighbor candidates to a row subset and
    ``queries`` selects where Jacobians are evaluated (defaults: all rows for
    both). Returns an array of shape (n_queries, Q_y, Q_x); with the default
    arguments row t equals knn_local_jacobian(X, Y, t, cfg) up to
    floating-point identity (the same factorization is applied per matrix).
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    q_x, q_y = X.shape[1], Y.shape[1]
    k = cfg.k if cfg.k is not None else jacobian_k_default(q_x, q_y)
    if k <= max(q_x, q_y):
        raise DataError(f"k must exceed max(Q_x, Q_y) = {max(q_x, q_y)}, got {k}")
    if library is None and queries is None:
        _, nbrs = theiler_knn(Y, k, cfg.theiler_window)
        q_idx = np.arange(Y.shape[0])
    else:
        library = np.arange(Y.shape[0]) if library is None else np.asarray(library, dtype=np.intp)
        q_idx = np.arange(Y.shape[0]) if queries is None else np.asarray(queries, dtype=np.intp)
        _, lib_nbrs = theiler_knn(
            Y[library], k, cfg.theiler_window,
            query_points=Y[q_idx], query_times=q_idx, point_times=library,
        )
        nbrs = library[lib_nbrs]
    d_y = Y[nbrs] - Y[q_idx, None, :]
    d_x = X[nbrs] - X[q_idx, None, :]
    degenerate = ~np.any(d_y, axis=(1, 2))
    if np.any(degenerate):
        t_bad = int(q_idx[np.nonzero(degenerate)[0][0]])
        raise DegenerateNeighborhood(f"all neighbor displacements vanish at t={t_bad}")
    return _min_norm_lstsq(d_y, d_x)


# -- differentiable cross-map models -------------------------------------------

class KernelRidgeCrossMap:
    """Gaussian-kernel ridge cross map with an analytic Jacobian.

    Fits F: Y -> X with F(y) = sum_i alpha_i k(y, Y_i),
    k(y, y') = exp(-||y - y'||^2 / (2 h^2)), alpha = (K + ridge I)^{-1} X.
    ``jacobian`` returns dF/dy of shape (Q_x, Q_y).
    """

    kind = "kernel_ridge"

    def __init__(self, Y: np.ndarray, X: np.ndarray, bandwidth: float, ridge: float):
        Y = np.asarray(Y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        if Y.shape[0] != X.shape[0]:
            raise DataError(
                f"row counts differ: {Y.shape[0]} inputs vs {X.shape[0]} targets"
            )
        if bandwidth <= 0:
            raise DataError(f"bandwidth must be positive, got {bandwidth}")
        if ridge < 0:
            raise DataError(f"ridge must be >= 0, got {ridge}")
        self.train_inputs = Y
        self.bandwidth = float(bandwidth)
        self.ridge = float(ridge)
        self.q_in = Y.shape[1]
        self.q_out = X.shape[1]
        gram = self._kernel(Y, Y)
        gram[np.diag_indices_from(gram)] += self.ridge
        try:
            self._coef = cho_solve(cho_factor(gram, lower=True), X)
        except LinAlgError as exc:
            raise SingularGram(
                "kernel Gram matrix is singular (duplicate training rows with "
                "ridge=0?)"
            ) from exc

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        sq = (
            np.sum(a * a, axis=1)[:, None]
            + np.sum(b * b, axis=1)[None, :]
            - 2.0 * a @ b.T
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * self.bandwidth**2))

    def predict(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        return self._kernel(queries, self.train_inputs) @ self._coef

    def jacobians(self, queries: np.ndarray) -> np.ndarray:
        """Analytic Jacobians, shape (n_queries, Q_x, Q_y)."""
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        kq = self._kernel(queries, self.train_inputs)
        h2 = self.bandwidth**2
        # dF_a/dy_b = sum_i alpha[i,a] * k(y, Y_i) * (Y[i,b] - y_b) / h^2
        weighted = kq @ (self._coef[:, :, None] * self.train_inputs[:, None, :])\
            .reshape(len(self.train_inputs), -1)
        term1 = weighted.reshape(len(queries), self.q_out, self.q_in)
        term2 = (kq @ self._coef)[:, :, None] * queries[:, None, :]
        return (term1 - term2) / h2

    def jacobian(self, query: np.ndarray) -> np.ndarray:
        return self.jacobians(np.asarray(query)[None])[0]


class KnnLocalLinearCrossMap:
    """Local-linear k-NN cross map: affine fit over each query's neighbors.

    For a query y, the k nearest training inputs are fit with
    X ~ (Y - y) @ J + b; ``predict`` returns b and ``jacobian`` returns J
    transposed to the (Q_x, Q_y) model convention.
    """

    kind = "knn_local_linear"

    def __init__(self, Y: np.ndarray, X: np.ndarray, k: int | None = None):
        Y = np.asarray(Y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64)
        if Y.shape[0] != X.shape[0]:
            raise DataError(
                f"row counts differ: {Y.shape[0]} inputs vs {X.shape[0]} targets"
            )
        self.train_inputs = Y
        self.train_targets = X
        self.q_in = Y.shape[1]
        self.q_out = X.shape[1]
        self.k = k if k is not None else jacobian_k_default(self.q_out, self.q_in)
        if self.k <= self.q_in:
            raise DataError(f"k must exceed Q_y = {self.q_in}, got {self.k}")
        if Y.shape[0] < self.k:
            raise NotEnoughNeighbors(f"need {self.k} training rows, got {Y.shape[0]}")
        self._tree = cKDTree(Y)

    def _fit_local(self, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        _, nbrs = self._tree.query(queries, k=self.k)
        if self.k == 1:
            nbrs = nbrs[:, None]
        d_y = self.train_inputs[nbrs] - queries[:, None, :]
        ones = np.ones(d_y.shape[:2] + (1,))
        design = np.concatenate([d_y, ones], axis=2)
        coefs = _min_norm_lstsq(design, self.train_targets[nbrs])
        return coefs[:, :-1, :], coefs[:, -1, :]

    def predict(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        _, intercept = self._fit_local(queries)
        return intercept

    def jacobians(self, queries: np.ndarray) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        slopes, _ = self._fit_local(queries)
        return np.swapaxes(slopes, 1, 2)

    def jacobian(self, query: np.ndarray) -> np.ndarray:
        return self.jacobians(np.asarray(query)[None])[0]


CrossMapModel = KernelRidgeCrossMap | KnnLocalLinearCrossMap


def median_bandwidth(Y: np.ndarray, sample_cap: int = 1000) -> float:
    """Median pairwise distance over an (evenly subsampled) point set."""
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    if n > sample_cap:
        Y = Y[np.linspace(0, n - 1, sample_cap).astype(np.intp)]
    sq = (
        np.sum(Y * Y, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * Y @ Y.T
    )
    np.maximum(sq, 0.0, out=sq)
    d = np.sqrt(sq[np.triu_indices_from(sq, k=1)])
    med = float(np.median(d))
    if med == 0.0:
        raise DataError("all points coincide; bandwidth heuristic undefined")
    return med


def fit_kernel_ridge(
    Y: np.ndarray, X: np.ndarray, bandwidth: float | None = None, ridge: float = 1e-6
) -> KernelRidgeCrossMap:
    """Fit the Gaussian kernel ridge cross map F: Y -> X."""
    if bandwidth is None:
        bandwidth = median_bandwidth(Y)
    return KernelRidgeCrossMap(Y, X, bandwidth, ridge)


# -- simplex k-NN prediction (convergent cross mapping) -------------------------

def ccm_predict(
    Y: np.ndarray,
    x_targets: np.ndarray,
    library: np.ndarray,
    queries: np.ndarray,
    cfg: KnnConfig,
) -> np.ndarray:
    """Simplex-weighted nearest-neighbor prediction of x from the Y-embedding.

    For each query row t, the k = Q_y + 1 nearest library rows tau_i of Y[t]
    (Theiler-excluded by row index) get weights

        w_i = exp(-d_i / d_1) / sum_j exp(-d_j / d_1),

    uniform over the exact matches when d_1 = 0, and the prediction is
    sum_i w_i x_targets[tau_i]. Row indices double as time indices.
    """
    Y = np.asarray(Y, dtype=np.float64)
    x_targets = np.asarray(x_targets, dtype=np.float64)
    if x_targets.ndim == 1:
        x_targets = x_targets[:, None]
    library = np.asarray(library, dtype=np.intp)
    queries = np.asarray(queries, dtype=np.intp)
    k = cfg.k if cfg.k is not None else Y.shape[1] + 1
    if library.size < k:
        raise NotEnoughNeighbors(f"library has {library.size} points, need {k}")
    dists, nbrs = theiler_knn(
        Y[library], k, cfg.theiler_window,
        query_points=Y[queries], query_times=queries,
        point_times=library,
    )
    d1 = dists[:, :1]
    zero_first = d1[:, 0] == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.exp(-dists / d1)
    if np.any(zero_first):
        exact = dists[zero_first] == 0.0
        w[zero_first] = exact / exact.sum(axis=1, keepdims=True)
    w /= w.sum(axis=1, keepdims=True)
    lib_idx = library[nbrs]
    return np.einsum("qk,qkd->qd", w, x_targets[lib_idx])
