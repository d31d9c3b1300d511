#!/usr/bin/env python3
"""
Unit tests for the theta-family model.
"""

import json
import math
import os
import sys
import tempfile
import unittest
from dataclasses import replace

import numpy as np
from scipy import special

# Add the project root to the path so we can import the module
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

# Change to the project directory so relative imports work
original_cwd = os.getcwd()
os.chdir(project_root)

try:
    from theta_wiener_hopf.errors import DomainError, ParameterValidationError, SingularityError
    from theta_wiener_hopf.model import (CHI_GRID, EvalPoint, SeriesProcess, ThetaFamily, ThetaProcess,
                                         calibrate_gamma_and_drift, evaluate_exponent, expected_value,
                                         family_from_dict, integrability_check, laplace_exponent,
                                         laplace_exponent_series, levy_density, load_family, load_model, mirror,
                                         series_coefficients)
finally:
    os.chdir(original_cwd)

PARAMS_DIR = os.path.join(project_root, "theta_wiener_hopf", "params")


def make_family(chi: float, **overrides) -> ThetaFamily:
    values = dict(chi=chi, sigma=0.3, mu=0.1, c1=0.5, c2=0.8, alpha1=1.0, alpha2=1.5, beta1=0.5, beta2=0.7)
    values.update(overrides)
    return ThetaFamily(**values)


TEST_POINTS = (0.4, 0.3 + 0.5j, -0.4 + 1.0j, 2.0 + 3.0j, -1.2 - 0.7j)


class TestThetaFamily(unittest.TestCase):
    """Test cases for parameters, calibration and the closed-form exponent."""

    def test_exponent_vanishes_at_zero(self):
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                self.assertLess(abs(laplace_exponent(make_family(chi), 0.0)), 1e-12)

    def test_gamma_closed_form_for_half(self):
        """For chi = 1/2, gamma is the jump kernel at z = 0."""
        p = calibrate_gamma_and_drift(make_family(0.5))

        def kernel(c, alpha, beta):
            root = math.sqrt(alpha / beta)
            return c * math.pi / (math.tanh(math.pi * root) * root)

        expected = kernel(p.c1, p.alpha1, p.beta1) + kernel(p.c2, p.alpha2, p.beta2)
        self.assertAlmostEqual(p.gamma, expected, places=12)
        self.assertEqual(p.rho_drift, p.mu)

    def test_closed_form_matches_series(self):
        """Partial-fraction series with 10^5 terms agrees with the closed form."""
        for chi in CHI_GRID:
            p = calibrate_gamma_and_drift(make_family(chi))
            for z in TEST_POINTS:
                with self.subTest(chi=chi, z=z):
                    series = laplace_exponent_series(p, z, 100_000)
                    closed = laplace_exponent(p, z)
                    self.assertLess(abs(series.value - closed), max(1e-6, series.tail_bound))
                    self.assertLess(series.tail_bound, 1e-6)

    def test_series_without_terms_is_all_tail(self):
        p = make_family(1.0)
        series = laplace_exponent_series(p, 0.2 + 0.1j, 0)
        self.assertGreater(series.tail_bound, 0.0)

    def test_mean_convention_for_compensated_families(self):
        """For chi >= 2 the parameter mu is E[X_1] = phi'(0)."""
        for chi in (2.0, 2.5):
            with self.subTest(chi=chi):
                p = calibrate_gamma_and_drift(make_family(chi, mu=-0.05))
                h = 1e-5
                slope = (laplace_exponent(p, h) - laplace_exponent(p, -h)).real / (2 * h)
                self.assertAlmostEqual(slope, -0.05, places=6)
                self.assertEqual(expected_value(p), -0.05)

    def test_expected_value_for_linear_drift_families(self):
        for chi in (0.5, 1.0, 1.5):
            with self.subTest(chi=chi):
                p = calibrate_gamma_and_drift(make_family(chi))
                h = 1e-5
                slope = (laplace_exponent(p, h) - laplace_exponent(p, -h)).real / (2 * h)
                self.assertAlmostEqual(expected_value(p), slope, places=6)

    def test_symmetric_family_is_even(self):
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                p = make_family(chi, mu=0.0, c2=0.5, alpha2=1.0, beta2=0.5)
                z = 0.3 + 0.2j
                self.assertLess(abs(laplace_exponent(p, z) - laplace_exponent(p, -z)), 1e-11)

    def test_exponent_is_convex_on_the_strip(self):
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                p = calibrate_gamma_and_drift(make_family(chi))
                x = np.linspace(-1.4, 0.9, 12)
                h = 1e-3
                for u in x:
                    second = (laplace_exponent(p, u + h) - 2 * laplace_exponent(p, u)
                              + laplace_exponent(p, u - h)).real / (h * h)
                    self.assertGreater(second, 0.0)

    def test_no_jumps_is_brownian(self):
        p = make_family(1.0, c1=0.0, c2=0.0, sigma=1.2, mu=0.3)
        z = 0.7 - 0.2j
        self.assertAlmostEqual(laplace_exponent(p, z), 0.5 * 1.44 * z * z + 0.3 * z, places=13)

    def test_characteristic_representation(self):
        p = calibrate_gamma_and_drift(make_family(1.5))
        z = 0.8
        self.assertAlmostEqual(evaluate_exponent(p, EvalPoint(z, "characteristic")),
                               -laplace_exponent(p, 1j * z), places=13)
        with self.assertRaises(DomainError):
            EvalPoint(1.0, "fourier")

    def test_pole_proximity(self):
        p = make_family(1.0)
        pole = p.alpha1 + p.beta1 * 4
        with self.assertRaises(SingularityError) as ctx:
            laplace_exponent(p, pole)
        self.assertEqual(ctx.exception.pole_index, 2)
        with self.assertRaises(SingularityError) as ctx:
            laplace_exponent(p, -(p.alpha2 + p.beta2))
        self.assertEqual(ctx.exception.pole_index, -1)

    def test_mirror(self):
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                p = calibrate_gamma_and_drift(make_family(chi))
                z = 0.2 + 0.6j
                self.assertLess(abs(laplace_exponent(mirror(p), z) - laplace_exponent(p, -z)), 1e-11)
                self.assertEqual(mirror(mirror(p)), p)
                fresh = calibrate_gamma_and_drift(mirror(make_family(chi)))
                self.assertAlmostEqual(fresh.rho_drift, -p.rho_drift, places=8)


class TestLevyMeasure(unittest.TestCase):
    """Test cases for the density and its exponential series."""

    def test_density_singularity(self):
        """pi(x) x^chi / (Gamma(chi) c beta^(1 - chi)) tends to 1 at the origin on both sides."""
        for chi in CHI_GRID:
            p = make_family(chi)
            for sign, c, beta in ((1.0, p.c1, p.beta1), (-1.0, p.c2, p.beta2)):
                with self.subTest(chi=chi, sign=sign):
                    x = 1e-5
                    ratio = levy_density(p, sign * x) * x ** chi / (special.gamma(chi) * c * beta ** (1 - chi))
                    self.assertGreaterEqual(ratio, 0.99)
                    self.assertLessEqual(ratio, 1.01)

    def test_density_at_origin(self):
        with self.assertRaises(DomainError):
            levy_density(make_family(0.5), 0.0)

    def test_density_matches_series(self):
        """The density is sum a_n rho_n exp(-rho_n x)."""
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                p = make_family(chi)
                a, rho = series_coefficients(p).arrays("pos", 200)
                x = 0.8
                self.assertAlmostEqual(levy_density(p, x), math.fsum(a * rho * np.exp(-rho * x)), places=12)

    def test_series_coefficients(self):
        half = series_coefficients(make_family(0.5))
        a, rho = half.coeff_pos(1)
        self.assertEqual(rho, 1.0)
        self.assertAlmostEqual(a * rho, 0.5 * 0.5)
        one = series_coefficients(make_family(1.0))
        a, rho = one.coeff_neg(2)
        self.assertAlmostEqual(rho, 1.5 + 0.7 * 4)
        self.assertAlmostEqual(a * rho, 2 * 0.8 * 0.7 * 2)
        empty = series_coefficients(make_family(1.0, c1=0.0))
        self.assertEqual(empty.side_length("pos"), 0)
        self.assertEqual(empty.moment_sum("pos", 1.0), 0.0)

    def test_integrability(self):
        """Truncated second moments increase towards the series ceiling."""
        report = integrability_check(make_family(1.5))
        integrals = report["integrals"]
        self.assertEqual(len(integrals), 3)
        self.assertTrue(all(b >= a for a, b in zip(integrals, integrals[1:])))
        self.assertAlmostEqual(integrals[-1] / report["ceiling"], 1.0, delta=1e-4)


class TestEngineModels(unittest.TestCase):
    """Test cases for the models handed to the root finder."""

    def test_anchored_evaluation_matches_closed_form(self):
        for chi in CHI_GRID:
            with self.subTest(chi=chi):
                model = ThetaProcess(make_family(chi))
                pole = model.pole(3)
                offset = -1e-3 * pole
                expected = model.laplace_exponent(pole + offset).real
                self.assertAlmostEqual(model.phi_anchored(3, offset) / expected, 1.0, places=9)

    def test_near_pole_matches_closed_form(self):
        """Both sides of the switch to the pole-free formula, and points with w >= 0."""
        cases = ((1, 0.9), (1, 1.1), (1, 0.5), (1, -0.4), (2, 2.0), (2, 1.5), (2, -0.3), (2, 4.5), (2, 6.0),
                 (3, 0.8), (3, 12.0))
        for chi in CHI_GRID:
            kernel = make_family(chi).kernel
            for m, dw in cases:
                with self.subTest(chi=chi, m=m, dw=dw):
                    expected = kernel.evaluate(complex(-m * m + dw)).real
                    self.assertTrue(math.isfinite(kernel.near_pole(m, dw)))
                    self.assertAlmostEqual(kernel.near_pole(m, dw) / expected, 1.0, places=9)

    def test_anchored_evaluation_far_below_the_pole(self):
        """Offsets that put w past the previous half-integer, including z below alpha."""
        for chi in CHI_GRID:
            model = ThetaProcess(make_family(chi))
            for n, z in ((1, 0.2), (1, 0.9), (2, 1.3), (3, 2.0)):
                with self.subTest(chi=chi, n=n, z=z):
                    expected = model.laplace_exponent(z).real
                    self.assertAlmostEqual(model.phi_anchored(n, z - model.pole(n)), expected, places=9)

    def test_poles(self):
        model = ThetaProcess(make_family(0.5))
        self.assertEqual(model.pole(0), 0.0)
        self.assertEqual(model.pole(1), 1.0)
        self.assertEqual(model.pole(2), 1.5)
        self.assertIsNone(model.n_poles)
        self.assertEqual(ThetaProcess(make_family(1.0, c1=0.0)).n_poles, 0)
        self.assertEqual(ThetaProcess(make_family(1.0)).pole(1), 1.5)

    def test_side_view(self):
        model = ThetaProcess(make_family(1.0))
        neg = model.side("neg")
        self.assertEqual(neg.pole(1), 1.5 + 0.7)
        self.assertAlmostEqual(neg.laplace_exponent(0.4 + 0.1j), model.laplace_exponent(-0.4 - 0.1j), places=11)
        self.assertIs(model.side("pos"), model)
        with self.assertRaises(ValueError):
            model.side("up")

    def test_series_process(self):
        model = SeriesProcess(0.5, 0.1, [1.0, 0.5], [2.0, 5.0], [0.8], [1.5])
        self.assertEqual(model.laplace_exponent(0.0), 0.0)
        self.assertEqual(model.n_poles, 2)
        z = 1.0 + 0.5j
        expected = (0.125 * z * z + 0.1 * z + z * z * (1.0 / (2.0 * (2.0 - z)) + 0.5 / (5.0 * (5.0 - z)))
                    + z * z * 0.8 / (1.5 * (1.5 + z)))
        self.assertAlmostEqual(model.laplace_exponent(z), expected, places=13)
        offset = 1e-6
        self.assertAlmostEqual(model.phi_anchored(1, offset) / model.laplace_exponent(2.0 + offset).real, 1.0,
                               places=8)
        self.assertEqual(model.mirror().mirror().to_dict(), model.to_dict())

    def test_series_process_validation(self):
        with self.assertRaises(ParameterValidationError) as ctx:
            SeriesProcess(0.5, 0.0, [1.0, 1.0], [3.0, 2.0], [], [])
        self.assertEqual(ctx.exception.field, "a")
        with self.assertRaises(ParameterValidationError) as ctx:
            SeriesProcess(-0.5, 0.0, [], [], [], [])
        self.assertEqual(ctx.exception.field, "sigma")


class TestParameterFiles(unittest.TestCase):
    """Test cases for loading and validating parameter files."""

    def _write(self, data) -> str:
        handle = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
        with handle:
            json.dump(data, handle)
        self.addCleanup(os.unlink, handle.name)
        return handle.name

    def test_demo_files_load(self):
        for name in sorted(os.listdir(PARAMS_DIR)):
            with self.subTest(name=name):
                model = load_model(os.path.join(PARAMS_DIR, name))
                self.assertLess(abs(model.laplace_exponent(0.0)), 1e-12)

    def test_demo_files_cover_every_family(self):
        chis = set()
        for name in os.listdir(PARAMS_DIR):
            with open(os.path.join(PARAMS_DIR, name)) as f:
                data = json.load(f)
            if data.get("kind", "theta") == "theta":
                chis.add(load_family(os.path.join(PARAMS_DIR, name)).chi)
        self.assertEqual(chis, set(CHI_GRID))

    def test_missing_field(self):
        data = make_family(1.0).to_dict()
        del data["beta2"]
        with self.assertRaises(ParameterValidationError) as ctx:
            family_from_dict(data)
        self.assertEqual(ctx.exception.field, "beta2")

    def test_invalid_values(self):
        for field, value in (("chi", 0.75), ("alpha1", 0.0), ("c2", -1.0), ("sigma", -0.1), ("mu", "fast")):
            with self.subTest(field=field):
                data = make_family(1.0).to_dict()
                data[field] = value
                with self.assertRaises(ParameterValidationError) as ctx:
                    load_model(self._write(data))
                self.assertEqual(ctx.exception.field, field)

    def test_missing_file(self):
        with self.assertRaises(ParameterValidationError) as ctx:
            load_model("does_not_exist.json")
        self.assertEqual(ctx.exception.field, "params")

    def test_round_trip(self):
        p = make_family(2.5)
        self.assertEqual(family_from_dict(p.to_dict()), p)
        self.assertEqual(replace(p, gamma=1.0).to_dict(), p.to_dict())


if __name__ == '__main__':
    unittest.main()
