import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tscausal.embedding import (
    EmbeddingParams,
    delay_embed,
    false_neighbor_fractions,
    select_dimension_fnn,
    select_lag,
)
from tscausal.errors import (
    DataError,
    DimensionSaturationWarning,
    LagCapWarning,
    SeriesTooShort,
    ZeroVariance,
)

from conftest import make_series


class TestDelayEmbed:
    def test_basic_rows_newest_first(self):
        emb = delay_embed(make_series([0, 1, 2, 3, 4, 5]), EmbeddingParams(lag=1, dim=3))
        assert emb.base_offset == 2
        np.testing.assert_array_equal(
            emb.points, [[2, 1, 0], [3, 2, 1], [4, 3, 2], [5, 4, 3]]
        )

    def test_lag_two(self):
        emb = delay_embed(make_series([0, 1, 2, 3, 4, 5]), EmbeddingParams(lag=2, dim=2))
        np.testing.assert_array_equal(emb.points, [[2, 0], [3, 1], [4, 2], [5, 3]])

    def test_dim_one_is_identity_column(self):
        emb = delay_embed(make_series([7, 8, 9]), EmbeddingParams(lag=1, dim=1))
        np.testing.assert_array_equal(emb.points, [[7], [8], [9]])
        assert emb.base_offset == 0

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            delay_embed(make_series([1, 2, 3]), EmbeddingParams(lag=2, dim=3))

    @given(
        length=st.integers(5, 60),
        lag=st.integers(1, 6),
        dim=st.integers(1, 6),
    )
    @settings(max_examples=60, deadline=None)
    def test_shape_property(self, length, lag, dim, ):
        values = np.arange(length, dtype=float)
        expected_rows = length - (dim - 1) * lag
        if expected_rows <= 0:
            with pytest.raises(SeriesTooShort):
                delay_embed(make_series(values), EmbeddingParams(lag=lag, dim=dim))
            return
        emb = delay_embed(make_series(values), EmbeddingParams(lag=lag, dim=dim))
        assert emb.points.shape == (expected_rows, dim)
        # row t holds [x(s), x(s-lag), ...] with s = base_offset + t
        for t in (0, expected_rows - 1):
            s = emb.base_offset + t
            np.testing.assert_array_equal(
                emb.points[t], [values[s - j * lag] for j in range(dim)]
            )

    def test_params_validation(self):
        with pytest.raises(DataError):
            EmbeddingParams(lag=0, dim=2)
        with pytest.raises(DataError):
            EmbeddingParams(lag=1, dim=0)


class TestSelectLag:
    def test_sampled_cosine(self):
        # analytic 1/e crossing of cos(2*pi*l/100) sits between l=19 and 20;
        # the finite-sample estimator tips lag 19 just under the threshold
        x = np.cos(2 * np.pi * np.arange(400) / 100.0)
        assert select_lag(make_series(x)) == 19

    def test_iid_noise_gives_lag_one(self, rng):
        x = rng.standard_normal(10_000)
        assert select_lag(make_series(x)) == 1

    def test_constant_series_raises(self):
        with pytest.raises(ZeroVariance):
            select_lag(make_series([5.0] * 50))

    def test_cap_with_warning(self):
        ramp = np.arange(40, dtype=float)
        with pytest.warns(LagCapWarning):
            lag = select_lag(make_series(ramp))
        assert lag == 10

    def test_threshold_validation(self):
        with pytest.raises(DataError):
            select_lag(make_series([1.0, 2.0, 3.0, 2.0]), threshold=1.5)


class TestSelectDimensionFnn:
    def test_lorenz_needs_three_dimensions(self, lorenz_long):
        lag = 10  # 0.1 time units at dt=0.01
        fractions = false_neighbor_fractions(lorenz_long, lag, max_dim=4)
        assert fractions[1] >= 0.005  # dimension 2 under-embeds
        assert fractions[2] < 0.005
        assert select_dimension_fnn(lorenz_long, lag, max_dim=10) == 3

    def test_sine_embeds_in_the_plane(self):
        x = np.sin(np.arange(0, 200, 0.05))
        series = make_series(x, dt=0.05)
        lag = select_lag(series)
        assert select_dimension_fnn(series, lag, max_dim=6) == 2

    def test_noise_saturates(self, rng):
        x = rng.standard_normal(2000)
        series = make_series(x)
        fractions = false_neighbor_fractions(series, lag=1, max_dim=6)
        assert np.all(fractions >= 0.005)
        with pytest.warns(DimensionSaturationWarning):
            dim = select_dimension_fnn(series, lag=1, max_dim=6)
        assert dim == 6

    def test_lorenz_fractions_nonincreasing(self, lorenz_long):
        fractions = false_neighbor_fractions(lorenz_long, 10, max_dim=5)
        inversions = sum(
            fractions[i + 1] > fractions[i] + 1e-12 for i in range(len(fractions) - 1)
        )
        assert inversions <= 1

    def test_tolerance_validation(self, lorenz_long):
        with pytest.raises(DataError):
            select_dimension_fnn(lorenz_long, 10, tolerance=1.5)
