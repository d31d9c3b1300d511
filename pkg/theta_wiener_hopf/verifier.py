#!/usr/bin/env python3
"""
Theta Wiener-Hopf Verifier - Check the engine's structural guarantees on a parameter file.

Suites:
  interlacing    roots and poles alternate, residuals of every refined root are tiny
  factorization  q/(q - phi(z)) equals the product of both factors at random complex z
  asymptotics    large-root expansions track refined roots at their stated order
  mixture        mixture weights are nonnegative, sum to one, reproduce the factor
Results are displayed with color-coded pass/fail indicators and running counts, and
written to verify_result.json.
"""

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
from rich.console import Console

from theta_wiener_hopf.errors import UnsupportedRegimeError, WienerHopfError
from theta_wiener_hopf.model import load_model
from theta_wiener_hopf.model_base import SIDES, LevyModel
from theta_wiener_hopf.roots import asymptotic_error, bracket_and_refine, build_asymptotic_tail
from theta_wiener_hopf.wiener_hopf import (WhFactorization, factorization_residual, factorize, mixture_coefficients,
                                          mixture_transform, wh_factor)

console = Console()

SUITES = ("interlacing", "factorization", "asymptotics", "mixture")
DEFAULT_Q_LIST = (0.1, 1.0, 10.0)

FACTOR_RESIDUAL_TOL = 1e-6
MASS_TOL = 1e-4
TRANSFORM_TOL = 1e-8
ORDER_LADDER = (20, 40, 80)
# Allowed growth of the scaled expansion error across the ladder
ORDER_GROWTH = 4.0


@dataclass
class CheckResult:
    """
    Outcome of one verification check.

    :param name: Check label
    :type name: str
    :param passed: Whether the measured value met the threshold
    :type passed: bool
    :param measured: Measured quantity
    :type measured: float
    :param threshold: Limit the quantity was compared against
    :type threshold: float
    :param detail: Extra context for the report
    :type detail: str
    """

    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


Check = Tuple[str, Callable[[], CheckResult]]


def _result(name: str, measured: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(measured <= threshold), measured=float(measured),
                       threshold=threshold, detail=detail)


def interlacing_checks(model: LevyModel, q_list: List[float], n_roots: int) -> Iterator[Check]:
    for q in q_list:
        for side in SIDES:
            def check(q: float = q, side: str = side) -> CheckResult:
                rs = bracket_and_refine(model, q, side, n_roots)
                problems = rs.check_interlacing()
                if problems:
                    return CheckResult(f"interlacing q={q:g} {side}", False, float(len(problems)), 0.0, problems[0])
                worst = float(rs.residuals.max()) if rs.n_exact else 0.0
                return _result(f"interlacing q={q:g} {side}", worst, 1e-10 * (1.0 + q),
                               f"{rs.n_exact} roots, max residual {worst:.3g}")
            yield f"interlacing q={q:g} {side}", check


def _random_points(rng: np.random.Generator, count: int, radius: float = 5.0, margin: float = 0.1) -> List[complex]:
    points: List[complex] = []
    while len(points) < count:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z) <= radius and abs(z.imag) >= margin:
            points.append(z)
    return points


def factorization_checks(model: LevyModel, q_list: List[float], n_points: int, seed: int) -> Iterator[Check]:
    for q in q_list:
        def check(q: float = q) -> CheckResult:
            f = factorize(model, q, product_tol=1e-8, radius=5.0)
            points = _random_points(np.random.default_rng(seed), n_points)
            worst = max(factorization_residual(f, z) for z in points)
            return _result(f"factorization q={q:g}", worst, FACTOR_RESIDUAL_TOL,
                           f"{n_points} points, {f.pos.n_exact}+{f.neg.n_exact} roots")
        yield f"factorization q={q:g}", check


def asymptotics_checks(model: LevyModel, q_list: List[float]) -> Iterator[Check]:
    for q in q_list:
        for side in SIDES:
            def check(q: float = q, side: str = side) -> CheckResult:
                name = f"asymptotics q={q:g} {side}"
                try:
                    tail = build_asymptotic_tail(model, q, side)
                except UnsupportedRegimeError as e:
                    return CheckResult(name, True, 0.0, 0.0, f"skipped: {e}")
                scaled = []
                for n in ORDER_LADDER:
                    error = asymptotic_error(model, q, side, tail, n) * n ** tail.order
                    scaled.append(error / math.log(n) if tail.log_factor else error)
                growth = max(scaled[1:]) / scaled[0] if scaled[0] > 0 else 0.0
                return _result(name, growth, ORDER_GROWTH,
                               f"template {tail.template}, validated from n={tail.validated_from}, "
                               f"scaled errors {', '.join(f'{s:.3g}' for s in scaled)}")
            yield f"asymptotics q={q:g} {side}", check


def mixture_checks(model: LevyModel, q_list: List[float]) -> Iterator[Check]:
    factorizations: Dict[float, WhFactorization] = {}
    for q in q_list:
        for side in SIDES:
            def check(q: float = q, side: str = side) -> CheckResult:
                name = f"mixture q={q:g} {side}"
                if q not in factorizations:
                    factorizations[q] = factorize(model, q, product_tol=1e-8, radius=5.0)
                f = factorizations[q]
                law = mixture_coefficients(f, side)
                if law.weights.size and law.weights.min() < 0:
                    return CheckResult(name, False, float(law.weights.min()), 0.0, "negative weight")
                if not 0.0 <= law.atom_c0 < 1.0:
                    return CheckResult(name, False, law.atom_c0, 1.0, "atom outside [0, 1)")
                if abs(law.tail_mass_bound) > MASS_TOL:
                    return CheckResult(name, False, abs(law.tail_mass_bound), MASS_TOL, "mass defect")
                worst = max(abs(mixture_transform(law, z) - wh_factor(f, z, side)) for z in (0.5, 1.0, 3.0))
                return _result(name, worst, TRANSFORM_TOL,
                               f"c0={law.atom_c0:.6g}, {law.n_terms} weights, mass defect {law.tail_mass_bound:.3g}")
            yield f"mixture q={q:g} {side}", check


def build_checks(model: LevyModel, suite: str, q_list: List[float], n_roots: int = 50,
                 n_points: int = 50, seed: int = 0) -> List[Check]:
    """
    Checks of one suite, or of every suite for "all".

    :raises ValueError: For an unknown suite name
    """
    suites = SUITES if suite == "all" else (suite,)
    checks: List[Check] = []
    for name in suites:
        if name == "interlacing":
            checks.extend(interlacing_checks(model, q_list, n_roots))
        elif name == "factorization":
            checks.extend(factorization_checks(model, q_list, n_points, seed))
        elif name == "asymptotics":
            checks.extend(asymptotics_checks(model, q_list))
        elif name == "mixture":
            checks.extend(mixture_checks(model, q_list))
        else:
            raise ValueError(f"unknown suite {name!r}, expected one of {SUITES + ('all',)}")
    return checks


def run_check(check: Check, index: int, passed: int, total: int) -> CheckResult:
    """
    Run a single check and print its line with the running pass count.

    :param check: Label and callable
    :type check: Check
    :param index: Position of the check (for display)
    :type index: int
    :param passed: Number of checks passed so far
    :type passed: int
    :param total: Total number of checks
    :type total: int
    :return: Check outcome (errors count as failures)
    :rtype: CheckResult
    """
    label, run = check
    start_time = time.time()
    try:
        result = run()
    except (WienerHopfError, ValueError, ArithmeticError) as e:
        console.print(f"[red]✗[/red] Check {index}: ERROR ({passed}/{total} passed) - {label}: {e}")
        return CheckResult(label, False, math.nan, math.nan, f"{type(e).__name__}: {e}")
    elapsed = time.time() - start_time
    if result.passed:
        console.print(f"[green]✓[/green] Check {index}: PASS ({passed + 1}/{total} passed) - "
                      f"{result.name}: {result.measured:.3g} <= {result.threshold:.3g} ({elapsed:.1f}s)")
    else:
        console.print(f"[red]✗[/red] Check {index}: FAIL ({passed}/{total} passed) - "
                      f"{result.name}: {result.measured:.3g} > {result.threshold:.3g} {result.detail}")
    return result


def run_verification(model: LevyModel, suite: str, q_list: List[float], result_path: Optional[str] = None,
                     **options: int) -> Dict[str, object]:
    """
    Run a suite and return (and optionally write) the summary.

    :param model: Model under test
    :type model: LevyModel
    :param suite: Suite name or "all"
    :type suite: str
    :param q_list: Killing rates
    :type q_list: List[float]
    :param result_path: Where to write the JSON summary, None to skip writing
    :type result_path: Optional[str]
    :return: {"passed", "failed", "total", "checks"}
    :rtype: Dict[str, object]
    """
    checks = build_checks(model, suite, q_list, **options)
    total = len(checks)
    passed = 0
    results = []
    console.print("\n[bold]Running checks...[/bold]")
    for i, check in enumerate(checks, 1):
        result = run_check(check, i, passed, total)
        if result.passed:
            passed += 1
        results.append(result)

    console.print("\n[bold]Final Results:[/bold]")
    console.print(f"[cyan]Passed:[/cyan] {passed}/{total}")
    summary: Dict[str, object] = {
        "passed": passed,
        "failed": total - passed,
        "total": total,
        "suite": suite,
        "q_list": list(q_list),
        "checks": [{k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                    for k, v in asdict(r).items()} for r in results],
    }
    if result_path is not None:
        try:
            with open(result_path, "w") as f:
                json.dump(summary, f, indent=2)
            console.print(f"[green]✓[/green] Verification results written to {result_path}")
        except OSError as e:
            console.print(f"[red]✗[/red] Failed to write verification results: {e}")
    if passed == total:
        console.print("[bold green]🎉 All checks passed![/bold green]")
    else:
        console.print(f"[bold red]❌ {total - passed} check(s) failed[/bold red]")
    return summary


def parse_q_list(text: str) -> List[float]:
    """Comma-separated killing rates, each positive."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid q list {text!r}")
    if not values or any(not q > 0 for q in values):
        raise argparse.ArgumentTypeError(f"q list must hold positive numbers, got {text!r}")
    return values


def main() -> None:
    """
    Main entry point for the verifier.
    """
    parser = argparse.ArgumentParser(
        description='Theta Wiener-Hopf Verifier - Check interlacing, factorization, asymptotics and mixtures',
        epilog='Writes verify_result.json and exits with 1 if any check fails'
    )
    parser.add_argument('--params', type=str, required=True, help='Path to the JSON parameter file')
    parser.add_argument('--suite', choices=SUITES + ("all",), default="all", help='Suite to run (default: all)')
    parser.add_argument('--q-list', type=parse_q_list, default=list(DEFAULT_Q_LIST),
                        help='Comma-separated killing rates (default: 0.1,1,10)')
    parser.add_argument('--roots', type=int, default=50, help='Roots per side for interlacing (default: 50)')
    parser.add_argument('--points', type=int, default=50, help='Random points for factorization (default: 50)')
    parser.add_argument('--seed', type=int, default=0, help='Seed for the random test points (default: 0)')
    parser.add_argument('--result-path', type=str, default="verify_result.json",
                        help='Where to write the JSON summary (default: verify_result.json)')
    args = parser.parse_args()

    console.print("[bold blue]θ Theta Wiener-Hopf Verifier[/bold blue]")
    try:
        model = load_model(args.params)
    except WienerHopfError as e:
        console.print(f"[red]✗ {e}[/red]")
        sys.exit(2)
    summary = run_verification(model, args.suite, args.q_list, args.result_path,
                               n_roots=args.roots, n_points=args.points, seed=args.seed)
    if summary["failed"]:
        sys.exit(1)


if __name__ == '__main__':
    main()
