import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tscausal.crossmap import (
    KernelRidgeCrossMap,
    KnnConfig,
    KnnLocalLinearCrossMap,
    ccm_predict,
    fit_kernel_ridge,
    knn_local_jacobian,
    local_jacobians,
    median_bandwidth,
    theiler_knn,
)
from tscausal.errors import (
    DataError,
    DegenerateNeighborhood,
    NotEnoughNeighbors,
    SingularGram,
)


def circle_points(n=200, radius=1.0, seed=0):
    rng = np.random.default_rng(seed)
    angles = np.sort(rng.uniform(0, 2 * np.pi, n))
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


class TestTheilerKnn:
    def test_matches_brute_force(self, rng):
        pts = rng.standard_normal((60, 3))
        for window in (0, 2, 5):
            dists, nbrs = theiler_knn(pts, k=4, theiler_window=window)
            for t in range(60):
                d2 = np.linalg.norm(pts - pts[t], axis=1)
                allowed = np.abs(np.arange(60) - t) > window
                order = np.argsort(d2[allowed], kind="stable")
                expected = np.arange(60)[allowed][order][:4]
                np.testing.assert_allclose(np.sort(dists[t]), dists[t])
                np.testing.assert_allclose(
                    d2[nbrs[t]], d2[expected], atol=1e-12
                )

    def test_exclusion_respected(self, rng):
        pts = rng.standard_normal((50, 2))
        _, nbrs = theiler_knn(pts, k=3, theiler_window=4)
        gaps = np.abs(nbrs - np.arange(50)[:, None])
        assert gaps.min() > 4

    def test_not_enough_neighbors(self, rng):
        pts = rng.standard_normal((8, 2))
        with pytest.raises(NotEnoughNeighbors):
            theiler_knn(pts, k=4, theiler_window=3)


class TestKnnLocalJacobian:
    def test_identity_map(self, rng):
        Y = rng.standard_normal((100, 3))
        J = knn_local_jacobian(Y, Y, 10, KnnConfig(k=8))
        np.testing.assert_allclose(J, np.eye(3), atol=1e-10)

    def test_global_linear_map_on_circle(self):
        Y = circle_points(200)
        A = np.array([[2.0, 1.0], [0.5, 3.0]])
        X = Y @ A.T
        J = knn_local_jacobian(X, Y, 17, KnnConfig(k=6))
        np.testing.assert_allclose(J, A.T, atol=1e-8)

    @given(
        seed=st.integers(0, 1000),
        q_x=st.integers(1, 3),
        q_y=st.integers(1, 3),
        k=st.integers(4, 12),
    )
    @settings(max_examples=40, deadline=None)
    def test_global_linear_exactness_property(self, seed, q_x, q_y, k):
        assume(k > max(q_x, q_y))
        rng = np.random.default_rng(seed)
        A = rng.uniform(-2, 2, (q_x, q_y))
        Y = rng.standard_normal((80, q_y))
        X = Y @ A.T
        t = int(rng.integers(0, 80))
        J = knn_local_jacobian(X, Y, t, KnnConfig(k=k))
        np.testing.assert_allclose(Y @ J, X, atol=1e-8)

    def test_local_quadratic_jacobian(self, rng):
        Y = np.array([1.0, 1.0]) + 0.01 * rng.standard_normal((500, 2))
        X = np.column_stack([Y[:, 0] ** 2, Y[:, 1]])
        t = 100
        J = knn_local_jacobian(X, Y, t, KnnConfig(k=20))
        # analytic Jacobian of (y1^2, y2) near (1, 1)
        np.testing.assert_allclose(J, [[2.0, 0.0], [0.0, 1.0]], atol=0.05)

    def test_k_must_exceed_dimensions(self, rng):
        Y = rng.standard_normal((50, 3))
        with pytest.raises(DataError):
            knn_local_jacobian(Y, Y, 0, KnnConfig(k=3))

    def test_degenerate_neighborhood(self):
        Y = np.zeros((20, 2))
        X = np.zeros((20, 2))
        with pytest.raises(DegenerateNeighborhood):
            knn_local_jacobian(X, Y, 0, KnnConfig(k=4))

    def test_batch_matches_single(self, rng):
        Y = rng.standard_normal((60, 2))
        X = np.column_stack([np.sin(Y[:, 0]), Y.prod(axis=1)])
        cfg = KnnConfig(k=7, theiler_window=1)
        batch = local_jacobians(X, Y, cfg)
        for t in (0, 13, 59):
            single = knn_local_jacobian(X, Y, t, cfg)
            np.testing.assert_array_equal(batch[t], single)

    def test_rank_deficient_minimum_norm(self):
        # all neighbor displacements along one direction: lstsq must return
        # the minimum-norm solution instead of failing
        Y = np.column_stack([np.linspace(0, 1, 30), np.zeros(30)])
        X = 2.0 * Y
        J = knn_local_jacobian(X, Y, 15, KnnConfig(k=5))
        np.testing.assert_allclose(J, [[2.0, 0.0], [0.0, 0.0]], atol=1e-10)


class TestKernelRidge:
    def test_scalar_slope(self, rng):
        Y = rng.uniform(-1, 1, (300, 1))
        X = 3.0 * Y
        model = fit_kernel_ridge(Y, X, bandwidth=float(Y.std()), ridge=1e-6)
        interior = Y[np.abs(Y[:, 0]) < 0.8]
        jacs = model.jacobians(interior)
        assert jacs.min() >= 2.9 and jacs.max() <= 3.1

    def test_analytic_jacobian_matches_finite_differences(self, rng):
        Y = rng.uniform(-1, 1, (400, 3))
        X = np.column_stack([np.sin(Y[:, 0]), Y[:, 1] * Y[:, 2], Y.sum(axis=1)])
        model = fit_kernel_ridge(Y, X, bandwidth=1.0, ridge=1e-8)
        queries = rng.uniform(-0.9, 0.9, (100, 3))
        analytic = model.jacobians(queries)
        step = 1e-5
        for b in range(3):
            offset = np.zeros(3)
            offset[b] = step
            fd = (model.predict(queries + offset) - model.predict(queries - offset)) / (2 * step)
            np.testing.assert_allclose(analytic[:, :, b], fd, atol=1e-5)

    def test_duplicate_rows_with_zero_ridge_raise(self):
        Y = np.array([[0.0], [1.0], [1.0], [2.0]])
        X = np.array([[0.0], [1.0], [1.0], [4.0]])
        with pytest.raises(SingularGram):
            KernelRidgeCrossMap(Y, X, bandwidth=1.0, ridge=0.0)

    def test_predict_interpolates_training_data(self, rng):
        Y = rng.standard_normal((100, 2))
        X = np.column_stack([Y[:, 0] + Y[:, 1], Y[:, 0] - Y[:, 1]])
        model = fit_kernel_ridge(Y, X, ridge=1e-10)
        np.testing.assert_allclose(model.predict(Y), X, atol=1e-4)

    def test_parameter_validation(self, rng):
        Y = rng.standard_normal((10, 2))
        with pytest.raises(DataError):
            KernelRidgeCrossMap(Y, Y, bandwidth=-1.0, ridge=0.1)
        with pytest.raises(DataError):
            KernelRidgeCrossMap(Y, Y[:5], bandwidth=1.0, ridge=0.1)

    def test_median_bandwidth_positive(self, rng):
        assert median_bandwidth(rng.standard_normal((500, 3))) > 0


class TestKnnLocalLinearModel:
    def test_linear_map_prediction_and_jacobian(self, rng):
        Y = rng.standard_normal((200, 2))
        A = np.array([[1.0, 2.0], [-1.0, 0.5]])
        X = Y @ A.T
        model = KnnLocalLinearCrossMap(Y, X, k=10)
        queries = rng.standard_normal((20, 2)) * 0.5
        np.testing.assert_allclose(model.predict(queries), queries @ A.T, atol=1e-8)
        jacs = model.jacobians(queries)
        for J in jacs:
            np.testing.assert_allclose(J, A, atol=1e-8)

    def test_jacobian_shape_convention(self, rng):
        Y = rng.standard_normal((100, 3))
        X = rng.standard_normal((100, 2))
        model = KnnLocalLinearCrossMap(Y, X, k=12)
        assert model.jacobian(Y[0]).shape == (2, 3)


class TestCcmPredict:
    def test_exact_match_dominates(self, rng):
        Y = rng.standard_normal((50, 2))
        targets = rng.standard_normal((50, 1))
        library = np.arange(40)
        # query row 45 placed exactly on library row 7
        Y[45] = Y[7]
        pred = ccm_predict(Y, targets, library, np.array([45]), KnnConfig())
        np.testing.assert_allclose(pred[0], targets[7], atol=1e-12)

    def test_constant_targets(self, rng):
        Y = rng.standard_normal((60, 3))
        targets = np.full((60, 1), 2.5)
        pred = ccm_predict(Y, targets, np.arange(40), np.arange(40, 60), KnnConfig())
        np.testing.assert_allclose(pred, 2.5, atol=1e-12)

    def test_ring_self_consistency(self):
        Y = circle_points(600, seed=4)
        x_true = Y[:, :1]
        library = np.arange(500)
        queries = np.arange(500, 600)
        pred = ccm_predict(Y, x_true, library, queries, KnnConfig())
        corr = np.corrcoef(pred[:, 0], x_true[queries, 0])[0, 1]
        assert corr > 0.99

    def test_predictions_in_neighbor_hull(self, rng):
        Y = rng.standard_normal((80, 2))
        targets = rng.standard_normal((80, 2))
        library = np.arange(60)
        queries = np.arange(60, 80)
        k = Y.shape[1] + 1
        dists, nbrs = theiler_knn(
            Y[library], k, 0, query_points=Y[queries], query_times=queries,
            point_times=library,
        )
        pred = ccm_predict(Y, targets, library, queries, KnnConfig())
        for i in range(len(queries)):
            hood = targets[library[nbrs[i]]]
            assert np.all(pred[i] >= hood.min(axis=0) - 1e-9)
            assert np.all(pred[i] <= hood.max(axis=0) + 1e-9)

    def test_library_too_small(self, rng):
        Y = rng.standard_normal((30, 4))
        with pytest.raises(NotEnoughNeighbors):
            ccm_predict(Y, Y[:, :1], np.arange(3), np.arange(10, 20), KnnConfig())
