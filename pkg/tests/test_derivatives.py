import numpy as np
import pytest

from tscausal.derivatives import (
    align_pair,
    derivative_series,
    savgol_derivative,
    vector_field_for_embedding,
)
from tscausal.embedding import EmbeddingParams, delay_embed
from tscausal.errors import AlignmentMismatch, InvalidFilterConfig, SeriesTooShort

from conftest import make_series


class TestFiniteDifferences:
    def test_forward_drops_last_sample(self):
        d = derivative_series(make_series([0, 1, 4, 9]), "forward")
        np.testing.assert_array_equal(d.values, [1, 3, 5])

    def test_central_exact_on_quadratic_including_endpoints(self):
        t = np.arange(5.0)
        d = derivative_series(make_series(t**2), "central")
        np.testing.assert_allclose(d.values, 2 * t, atol=1e-12)

    def test_error_levels_on_sine(self):
        t = np.arange(0, 6.28, 0.01)
        s = make_series(np.sin(t), dt=0.01)
        central_err = np.abs(derivative_series(s, "central").values - np.cos(t)).max()
        forward_err = np.abs(
            derivative_series(s, "forward").values - np.cos(t[:-1])
        ).max()
        assert central_err < 1e-4
        assert forward_err > 1e-3

    def test_central_is_second_order(self):
        def max_err(dt):
            t = np.arange(0, 3.0, dt)
            d = derivative_series(make_series(np.sin(t), dt=dt), "central")
            return np.abs(d.values[1:-1] - np.cos(t)[1:-1]).max()

        ratio = max_err(0.02) / max_err(0.01)
        assert 3.5 <= ratio <= 4.5

    def test_polynomial_exactness_relative(self, rng):
        coeffs = rng.uniform(-5, 5, 3)
        t = np.linspace(0, 4, 50)
        x = np.polyval(coeffs, t)
        truth = np.polyval(np.polyder(coeffs), t)
        d = derivative_series(make_series(x, dt=t[1] - t[0]), "central")
        np.testing.assert_allclose(d.values, truth, rtol=1e-10, atol=1e-10)

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            derivative_series(make_series([1.0, 2.0]), "central")


class TestSavgolDerivative:
    def test_exact_on_quadratic(self):
        t = np.arange(10.0)
        d = savgol_derivative(make_series(t**2), window=5, polyorder=2)
        np.testing.assert_allclose(d.values, 2 * t, atol=1e-10)

    def test_constant_slope(self):
        t = np.arange(30.0)
        d = savgol_derivative(make_series(3.0 * t + 1.0), window=7, polyorder=3)
        np.testing.assert_allclose(d.values, 3.0, atol=1e-10)

    def test_beats_central_differences_on_noisy_sine(self, rng):
        t = np.arange(0, 100, 0.05)
        x = np.sin(t)
        noisy = x + rng.standard_normal(t.size) * np.sqrt(np.var(x) / 100)  # 20 dB
        s = make_series(noisy, dt=0.05)
        truth = np.cos(t)
        rmse_sg = np.sqrt(np.mean((savgol_derivative(s, 5, 2).values - truth) ** 2))
        rmse_cd = np.sqrt(np.mean((derivative_series(s, "central").values - truth) ** 2))
        assert rmse_sg < rmse_cd

    def test_filter_config_validation(self):
        s = make_series(np.arange(20.0))
        with pytest.raises(InvalidFilterConfig):
            savgol_derivative(s, window=4, polyorder=2)
        with pytest.raises(InvalidFilterConfig):
            savgol_derivative(s, window=5, polyorder=5)
        with pytest.raises(SeriesTooShort):
            savgol_derivative(make_series([1.0, 2.0, 3.0]), window=5, polyorder=2)


class TestVectorField:
    def test_constant_field(self):
        vf = vector_field_for_embedding(
            make_series([1, 1, 1, 1, 1]), EmbeddingParams(lag=1, dim=2)
        )
        np.testing.assert_array_equal(vf.vectors, [[1, 1]] * 4)

    def test_direct_construction(self):
        vf = vector_field_for_embedding(
            make_series([0, 1, 2, 3]), EmbeddingParams(lag=1, dim=2)
        )
        np.testing.assert_array_equal(vf.vectors, [[1, 0], [2, 1], [3, 2]])

    def test_forward_scheme_length_bookkeeping(self):
        n = 10
        series = make_series(np.sin(np.arange(n)))
        params = EmbeddingParams(lag=1, dim=2)
        emb = delay_embed(series, params)
        deriv = derivative_series(series, "forward")  # length n - 1
        vf = vector_field_for_embedding(deriv, params, "forward")
        assert vf.vectors.shape[0] == n - 2
        points, vectors = align_pair(emb, vf)
        assert points.shape == vectors.shape == (n - 2, 2)

    def test_alignment_mismatch_on_dimension(self):
        series = make_series(np.arange(12.0))
        emb = delay_embed(series, EmbeddingParams(lag=1, dim=3))
        vf = vector_field_for_embedding(series, EmbeddingParams(lag=1, dim=2))
        with pytest.raises(AlignmentMismatch):
            align_pair(emb, vf)
