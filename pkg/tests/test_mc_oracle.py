#!/usr/bin/env python3
"""
Unit tests for the Monte Carlo supremum oracle.
"""

import math
import os
import sys
import tempfile
import unittest

import numpy as np
from scipy import stats

# Add the project root to the path so we can import the module
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

# Change to the project directory so relative imports work
original_cwd = os.getcwd()
os.chdir(project_root)

try:
    from theta_wiener_hopf.errors import ConfigurationError
    from theta_wiener_hopf.mc_oracle import (EmpiricalLaw, SimConfig, dump_samples, jump_plan, ks_statistic, ks_test,
                                             load_samples, simulate_sup)
    from theta_wiener_hopf.model import SeriesProcess, ThetaFamily, ThetaProcess, load_model
    from theta_wiener_hopf.wiener_hopf import factorize, mixture_coefficients, sup_cdf
finally:
    os.chdir(original_cwd)

PARAMS_DIR = os.path.join(project_root, "theta_wiener_hopf", "params")


# Pure-jump model with downward drift: paths are piecewise linear, so the
# supremum is attained at 0 or right after a jump and the time grid plays no role.
PURE_JUMP = SeriesProcess(0.0, -1.0, [1.0], [2.0], [0.5], [1.0])
BROWNIAN = SeriesProcess(1.0, 0.2, [], [], [], [])
RATIONAL = SeriesProcess(0.5, 0.1, [1.0, 0.5], [2.0, 5.0], [0.8, 0.3], [1.5, 4.0])


def make_family(chi: float) -> ThetaFamily:
    return ThetaFamily(chi=chi, sigma=0.3, mu=0.1, c1=0.5, c2=0.8, alpha1=1.0, alpha2=1.5, beta1=0.5, beta2=0.7)


class TestSimConfig(unittest.TestCase):
    """Validation of simulation settings."""

    def test_defaults(self):
        cfg = SimConfig()
        self.assertEqual(cfg.n_paths, 10_000)
        self.assertEqual(cfg.rng_seed, 0)

    def test_invalid_settings(self):
        for overrides in ({"n_paths": 0}, {"time_grid_dt": 0.0}, {"q": -1.0},
                          {"n_series_terms": -1}, {"batch_size": 0}):
            with self.subTest(**overrides):
                with self.assertRaises(ConfigurationError):
                    SimConfig(**overrides)

    def test_expected_jump_cap(self):
        """Too many expected jumps is a configuration problem, not a long run."""
        cfg = SimConfig(n_paths=1000, q=1e-6, max_expected_jumps=1e3)
        with self.assertRaises(ConfigurationError):
            simulate_sup(PURE_JUMP, cfg)


class TestJumpPlan(unittest.TestCase):
    """Splitting of the Levy measure into jumps and a Gaussian remainder."""

    def test_series_model_split(self):
        plan = jump_plan(RATIONAL, SimConfig(n_series_terms=1))
        np.testing.assert_array_equal(plan.rates, [1.0, 0.8])
        np.testing.assert_array_equal(plan.sizes, [2.0, 1.5])
        np.testing.assert_array_equal(plan.signs, [1.0, -1.0])
        self.assertAlmostEqual(plan.total_rate, 1.8, places=15)
        self.assertAlmostEqual(plan.drift, 0.1 - (0.5 - 0.8 / 1.5), places=14)
        self.assertAlmostEqual(plan.variance, 0.25 + 2.0 * (0.5 / 25.0 + 0.3 / 16.0), places=14)

    def test_all_terms_simulated(self):
        plan = jump_plan(PURE_JUMP, SimConfig(n_series_terms=200))
        self.assertEqual(plan.variance, 0.0)
        self.assertAlmostEqual(plan.drift, -1.0 - 0.5 + 0.5, places=15)

    def test_mean_convention(self):
        """With nothing simulated, compensated families keep the mean as drift."""
        plan = jump_plan(make_family(2.0), SimConfig(n_series_terms=0))
        self.assertEqual(plan.rates.size, 0)
        self.assertEqual(plan.total_rate, 0.0)
        self.assertAlmostEqual(plan.drift, 0.1, places=15)

    def test_linear_drift_convention(self):
        """Uncompensated families add the means of the omitted jumps."""
        process = ThetaProcess(make_family(0.5))
        measure = process.measure()
        plan = jump_plan(process, SimConfig(n_series_terms=0))
        expected = 0.1 + measure.moment_sum("pos", 1.0) - measure.moment_sum("neg", 1.0)
        self.assertAlmostEqual(plan.drift, expected, places=12)
        self.assertGreater(plan.variance, 0.3 ** 2)

    def test_unknown_model(self):
        with self.assertRaises(ConfigurationError):
            jump_plan(object(), SimConfig())


class TestSimulation(unittest.TestCase):
    """Sampling of the supremum."""

    def test_reproducible(self):
        cfg = SimConfig(n_paths=300, time_grid_dt=0.5, rng_seed=11, batch_size=64)
        first = simulate_sup(PURE_JUMP, cfg)
        second = simulate_sup(PURE_JUMP, cfg)
        np.testing.assert_array_equal(first.samples, second.samples)
        other = simulate_sup(PURE_JUMP, SimConfig(n_paths=300, time_grid_dt=0.5, rng_seed=12, batch_size=64))
        self.assertFalse(np.array_equal(first.samples, other.samples))

    def test_sorted_and_nonnegative(self):
        emp = simulate_sup(RATIONAL, SimConfig(n_paths=200, time_grid_dt=0.01, rng_seed=3))
        self.assertEqual(emp.n, 200)
        self.assertTrue(np.all(emp.samples >= 0))
        self.assertTrue(np.all(np.diff(emp.samples) >= 0))

    def test_agrees_with_exact_law(self):
        """Pure-jump sample against the mixture law, atom at zero included."""
        law = mixture_coefficients(factorize(PURE_JUMP, 1.0), "pos")
        emp = simulate_sup(PURE_JUMP, SimConfig(n_paths=4000, time_grid_dt=1.0, rng_seed=7))
        self.assertAlmostEqual(emp.atom_frequency, law.atom_c0, delta=0.03)
        tested = ks_test(emp, lambda x: sup_cdf(law, x))
        self.assertLess(tested.ks, 1.63 / math.sqrt(emp.n))
        self.assertGreater(tested.p_value, 1e-3)

    def test_brownian_supremum_on_coarse_grid(self):
        """The bridge maximum keeps a coarse grid unbiased: S is exponential with rate -mu + sqrt(mu^2 + 2q)."""
        rate = -0.2 + math.sqrt(0.04 + 2.0)
        for dt in (0.05, 0.5):
            with self.subTest(dt=dt):
                emp = simulate_sup(BROWNIAN, SimConfig(n_paths=20_000, time_grid_dt=dt, rng_seed=5))
                self.assertEqual(emp.atom_frequency, 0.0)
                tested = ks_test(emp, lambda x: 1.0 - np.exp(-rate * np.asarray(x)))
                self.assertLess(tested.ks, 1.95 / math.sqrt(emp.n))
                self.assertAlmostEqual(float(np.mean(emp.samples)), 1.0 / rate, delta=0.03)

    def test_brownian_agrees_with_mixture_law(self):
        law = mixture_coefficients(factorize(BROWNIAN, 1.0), "pos")
        emp = simulate_sup(BROWNIAN, SimConfig(n_paths=20_000, time_grid_dt=0.1, rng_seed=9))
        tested = ks_test(emp, lambda x: sup_cdf(law, x))
        self.assertLess(tested.ks, 0.0138)

    def test_theta_half_demo_agrees_with_mixture_law(self):
        model = load_model(os.path.join(PARAMS_DIR, "theta_half.json"))
        law = mixture_coefficients(factorize(model, 1.0), "pos")
        emp = simulate_sup(model, SimConfig(n_paths=20_000, time_grid_dt=1e-2, n_series_terms=200, rng_seed=3))
        tested = ks_test(emp, lambda x: sup_cdf(law, x))
        self.assertLessEqual(tested.ks, 0.02)


class TestKolmogorovSmirnov(unittest.TestCase):
    """KS distance with and without an atom at zero."""

    def test_single_point(self):
        emp = EmpiricalLaw(samples=np.array([0.5]))
        self.assertAlmostEqual(ks_statistic(emp, lambda x: np.clip(x, 0.0, 1.0)), 0.5, places=15)

    def test_atom_at_zero(self):
        emp = EmpiricalLaw(samples=np.array([0.0, 0.0, 1.0, 2.0]))

        def cdf(x):
            return 0.5 + 0.5 * (1.0 - np.exp(-np.asarray(x)))

        self.assertAlmostEqual(ks_statistic(emp, cdf), 0.5 * (1.0 - math.exp(-1.0)), places=14)
        self.assertEqual(emp.atom_frequency, 0.5)

    def test_scalar_cdf(self):
        emp = EmpiricalLaw(samples=np.array([0.1, 0.4, 0.6, 0.9]))
        vectorized = ks_statistic(emp, lambda x: np.clip(x, 0.0, 1.0))
        self.assertAlmostEqual(ks_statistic(emp, lambda x: min(1.0, float(x))), vectorized, places=15)

    def test_p_value(self):
        emp = EmpiricalLaw(samples=np.array([0.1, 0.4, 0.6, 0.9]))
        tested = ks_test(emp, lambda x: np.clip(x, 0.0, 1.0))
        self.assertAlmostEqual(tested.p_value, stats.kstwo.sf(tested.ks, 4), places=14)

    def test_empty_sample(self):
        with self.assertRaises(ConfigurationError):
            ks_statistic(EmpiricalLaw(samples=np.zeros(0)), lambda x: x)


class TestSampleFiles(unittest.TestCase):
    """Raw sample dumps."""

    def test_dump_and_load(self):
        emp = EmpiricalLaw(samples=np.array([0.0, 0.25, 1.5]), ks=0.1, p_value=0.5)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "samples.bin")
            dump_samples(emp, path)
            self.assertTrue(os.path.exists(path + ".json"))
            restored = load_samples(path)
        np.testing.assert_array_equal(restored.samples, emp.samples)
        self.assertEqual(restored.ks, 0.1)
        self.assertEqual(restored.p_value, 0.5)


if __name__ == '__main__':
    unittest.main()
