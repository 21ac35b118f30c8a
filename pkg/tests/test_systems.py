import numpy as np
import pytest

from tscausal.errors import DataError, Divergence, ZeroVariance
from tscausal.systems import (
    SimulationConfig,
    corrupt_additive_noise,
    corrupt_sine,
    initial_state_for_seed,
    rk4_integrate,
    rk4_step,
    rossler_lorenz_rhs,
)

from conftest import make_series, trajectory


class TestRhs:
    def test_unit_state(self):
        # second component is the time-scaled oscillator term 6*(z1 + 0.2*z2);
        # sixth is the standard Lorenz z-equation
        out = rossler_lorenz_rhs(np.ones(6), coupling=1.0)
        np.testing.assert_allclose(out, [-12.0, 7.2, -27.0, 0.0, 27.0, -5.0 / 3.0])

    def test_origin(self):
        out = rossler_lorenz_rhs(np.zeros(6), coupling=3.7)
        np.testing.assert_allclose(out, [0.0, 0.0, 1.2, 0.0, 0.0, 0.0])

    def test_no_feedback_from_driven_block(self, rng):
        for _ in range(100):
            state = rng.uniform(-10, 10, 6)
            altered = state.copy()
            altered[3:] = rng.uniform(-10, 10, 3)
            a = rossler_lorenz_rhs(state, 0.0)
            b = rossler_lorenz_rhs(altered, 0.0)
            np.testing.assert_array_equal(a[:3], b[:3])


class TestRk4:
    def test_single_step_matches_taylor_expansion(self):
        value = rk4_step(lambda z: z, np.array([1.0]), 0.1)[0]
        expected = 1 + 0.1 + 0.1**2 / 2 + 0.1**3 / 6 + 0.1**4 / 24
        assert abs(value - expected) < 1e-15

    def test_one_step_error_is_fifth_order(self):
        def one_step_error(h):
            return abs(np.exp(h) - rk4_step(lambda z: z, np.array([1.0]), h)[0])

        ratio = one_step_error(0.2) / one_step_error(0.1)
        assert 28 <= ratio <= 36

    def test_driver_ignores_driven_initial_condition(self):
        base = initial_state_for_seed(3)
        other = base.copy()
        other[3:] = [5.0, -3.0, 20.0]
        kwargs = dict(coupling=0.0, n_samples=500, transient_time=1.0)
        run_a = rk4_integrate(SimulationConfig(initial_state=base, **kwargs))
        run_b = rk4_integrate(SimulationConfig(initial_state=other, **kwargs))
        for name in ("z1", "z2", "z3"):
            np.testing.assert_array_equal(run_a[name].values, run_b[name].values)
        assert not np.array_equal(run_a["z4"].values, run_b["z4"].values)

    def test_trajectories_bounded(self):
        for seed in range(10):
            series = trajectory(1.0, 100 + seed, n_samples=2000)
            for s in series.values():
                assert np.all(np.abs(s.values) <= 100.0)

    def test_lorenz_z_average(self, lorenz_block):
        _, _, z6 = lorenz_block
        assert 20.0 <= z6.values.mean() <= 27.0

    def test_determinism(self):
        cfg = dict(coupling=1.5, seed=9, n_samples=300)
        a = rk4_integrate(SimulationConfig(**cfg))
        b = rk4_integrate(SimulationConfig(**cfg))
        for name in a:
            np.testing.assert_array_equal(a[name].values, b[name].values)

    def test_divergence_detection(self):
        bad = np.array([1e5, 1e5, 1e5, 0.0, 0.0, 0.0])
        with pytest.raises(Divergence):
            rk4_integrate(SimulationConfig(
                initial_state=bad, n_samples=100, transient_time=0.0
            ))

    def test_config_validation(self):
        with pytest.raises(DataError):
            SimulationConfig(dt_integrate=0.001, dt_sample=0.0015)
        with pytest.raises(DataError):
            SimulationConfig(coupling=-1.0)
        with pytest.raises(DataError):
            SimulationConfig(initial_state=np.ones(5))


class TestCorruption:
    def test_no_noise_sentinel(self):
        s = make_series(np.sin(np.arange(100.0)))
        out = corrupt_additive_noise(s, None, seed=1)
        np.testing.assert_array_equal(out.values, s.values)
        out = corrupt_additive_noise(s, np.inf, seed=1)
        np.testing.assert_array_equal(out.values, s.values)

    def test_zero_db_matches_signal_power(self, rng):
        s = make_series(rng.standard_normal(100_000))
        noisy = corrupt_additive_noise(s, 0.0, seed=7)
        noise_power = np.var(noisy.values - s.values)
        assert abs(noise_power - np.var(s.values)) < 0.05 * np.var(s.values)

    def test_noise_determinism(self):
        s = make_series(np.sin(np.arange(500.0)))
        a = corrupt_additive_noise(s, 20.0, seed=3)
        b = corrupt_additive_noise(s, 20.0, seed=3)
        np.testing.assert_array_equal(a.values, b.values)
        c = corrupt_additive_noise(s, 20.0, seed=4)
        assert not np.array_equal(a.values, c.values)

    def test_noise_on_constant_raises(self):
        with pytest.raises(ZeroVariance):
            corrupt_additive_noise(make_series([2.0] * 10), 10.0, seed=0)

    def test_sine_sentinel(self):
        s = make_series(np.sin(np.arange(100.0)))
        out = corrupt_sine(s, None)
        np.testing.assert_array_equal(out.values, s.values)
        out = corrupt_sine(s, -np.inf)
        np.testing.assert_array_equal(out.values, s.values)

    def test_sine_amplitude_at_zero_db(self, rng):
        # unit-power signal: amplitude must come out sqrt(2)
        values = rng.standard_normal(4000)
        values = (values - values.mean()) / values.std()
        s = make_series(values, dt=0.01)
        period = 2 * np.pi
        out = corrupt_sine(s, 0.0, period=period)
        component = out.values - s.values
        basis = np.sin(2 * np.pi * s.times / period)
        amplitude = np.dot(component, basis) / np.dot(basis, basis)
        assert abs(amplitude - np.sqrt(2.0)) < 1e-9

    def test_sine_on_constant_raises(self):
        with pytest.raises(ZeroVariance):
            corrupt_sine(make_series([0.0, 0.0, 0.0]), 0.0)

    def test_sine_period_validation(self):
        with pytest.raises(DataError):
            corrupt_sine(make_series([1.0, 2.0, 1.0]), 0.0, period=-1.0)
