#!/usr/bin/env python3
"""
Unit tests for the verifier module.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import unittest
from unittest.mock import Mock, patch

# Add the project root to the path so we can import the module
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, project_root)

# Change to the project directory so relative imports work
original_cwd = os.getcwd()
os.chdir(project_root)

try:
    from theta_wiener_hopf.errors import AccuracyError
    from theta_wiener_hopf.model import SeriesProcess
    from theta_wiener_hopf.verifier import CheckResult, build_checks, parse_q_list, run_check, run_verification
finally:
    os.chdir(original_cwd)


RATIONAL = SeriesProcess(0.5, 0.1, [1.0, 0.5], [2.0, 5.0], [0.8, 0.3], [1.5, 4.0])


class TestVerifier(unittest.TestCase):
    """Test cases for the verifier module."""

    def test_run_check_success(self):
        """A passing check is returned unchanged."""
        outcome = CheckResult("residual", True, 1e-12, 1e-10)
        check = ("residual", Mock(return_value=outcome))

        with patch('theta_wiener_hopf.verifier.console') as mock_console:
            result = run_check(check, 1, 0, 1)

        self.assertIs(result, outcome)
        check[1].assert_called_once()
        printed = mock_console.print.call_args[0][0]
        self.assertIn("PASS (1/1 passed)", printed)

    def test_run_check_failure(self):
        """A failing check reports the measured value against the threshold."""
        outcome = CheckResult("residual", False, 1e-3, 1e-6, "50 points")
        check = ("residual", Mock(return_value=outcome))

        with patch('theta_wiener_hopf.verifier.console') as mock_console:
            result = run_check(check, 2, 1, 3)

        self.assertFalse(result.passed)
        self.assertIn("FAIL (1/3 passed)", mock_console.print.call_args[0][0])

    def test_run_check_exception(self):
        """Engine errors become failed results instead of aborting the run."""
        check = ("residual", Mock(side_effect=AccuracyError("no convergence", achieved=1e-3)))

        with patch('theta_wiener_hopf.verifier.console') as mock_console:
            result = run_check(check, 1, 0, 1)

        self.assertFalse(result.passed)
        self.assertTrue(math.isnan(result.measured))
        self.assertIn("AccuracyError", result.detail)
        self.assertIn("ERROR", mock_console.print.call_args[0][0])

    def test_run_check_math_error(self):
        for error in (ValueError("math domain error"), ZeroDivisionError("division by zero")):
            with self.subTest(error=type(error).__name__):
                check = ("interlacing q=1 pos", Mock(side_effect=error))

                with patch('theta_wiener_hopf.verifier.console') as mock_console:
                    result = run_check(check, 2, 1, 3)

                self.assertFalse(result.passed)
                self.assertEqual(result.name, "interlacing q=1 pos")
                self.assertIn(type(error).__name__, result.detail)
                self.assertIn("ERROR (1/3 passed)", mock_console.print.call_args[0][0])

    def test_build_checks(self):
        """Each suite contributes its checks per killing rate."""
        self.assertEqual(len(build_checks(RATIONAL, "interlacing", [0.5, 2.0])), 4)
        self.assertEqual(len(build_checks(RATIONAL, "factorization", [0.5, 2.0])), 2)
        self.assertEqual(len(build_checks(RATIONAL, "all", [1.0])), 7)
        with self.assertRaises(ValueError):
            build_checks(RATIONAL, "nothing", [1.0])

    def test_parse_q_list(self):
        self.assertEqual(parse_q_list("0.1,1,10"), [0.1, 1.0, 10.0])
        for text in ("", "1,-2", "a,b", "0"):
            with self.subTest(text=text):
                with self.assertRaises(argparse.ArgumentTypeError):
                    parse_q_list(text)

    def test_run_verification_writes_summary(self):
        """Every suite passes on the rational model and the summary is written."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "verify_result.json")
            with patch('theta_wiener_hopf.verifier.console'):
                summary = run_verification(RATIONAL, "all", [1.0], path, n_points=10)
            with open(path) as f:
                written = json.load(f)

        self.assertEqual(summary["failed"], 0)
        self.assertEqual(summary["total"], 7)
        self.assertEqual(written["passed"], 7)
        self.assertEqual(written["suite"], "all")
        self.assertEqual(len(written["checks"]), 7)

    def test_run_verification_without_file(self):
        with patch('theta_wiener_hopf.verifier.console'), patch("builtins.open") as mock_file:
            summary = run_verification(RATIONAL, "interlacing", [1.0], None)
        mock_file.assert_not_called()
        self.assertEqual(summary["total"], 2)


if __name__ == '__main__':
    unittest.main()
