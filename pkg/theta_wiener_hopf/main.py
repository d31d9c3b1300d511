#!/usr/bin/env python3
"""
Command line interface for the Wiener-Hopf engine.

Subcommands compute root tables, factor values and supremum laws, run the
verification suites and cross-check laws by Monte Carlo. Artifacts go to files
or stdout, diagnostics to stderr.

Exit codes:
  0  success
  1  verification failure or numerical failure
  2  invalid parameters, flags or configuration
"""

import argparse
import dataclasses
import json
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from rich.console import Console

from theta_wiener_hopf.errors import (ConfigurationError, DomainError, ParameterValidationError,
                                      UnsupportedRegimeError, WienerHopfError)
from theta_wiener_hopf.mc_oracle import SimConfig, dump_samples, ks_test, simulate_sup
from theta_wiener_hopf.model import SCHEMA_VERSION, load_model
from theta_wiener_hopf.model_base import SIDES, LevyModel
from theta_wiener_hopf.roots import bracket_and_refine, build_asymptotic_tail, roots_to_csv
from theta_wiener_hopf.verifier import DEFAULT_Q_LIST, SUITES, parse_q_list, run_verification
from theta_wiener_hopf.wiener_hopf import (factorization_residual, factorize, grid_to_csv, load_law,
                                          mixture_coefficients, product_factor, save_law, sup_cdf)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

console = Console(stderr=True)


def parse_complex(text: str) -> complex:
    """
    Parse "a+bi", "a-bi", "bi" or "a" into a complex number.

    :param text: Flag value
    :type text: str
    :return: Parsed number
    :rtype: complex
    :raises argparse.ArgumentTypeError: If the text is not a complex literal
    """
    cleaned = text.strip().replace(" ", "").replace("I", "j").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid complex number {text!r}, expected a+bi")


def parse_grid(text: str) -> np.ndarray:
    """
    Parse "start:stop:step" into an inclusive grid of nonnegative points.

    :raises argparse.ArgumentTypeError: If the grid is malformed or empty
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must hold numbers, got {text!r}")
    if not step > 0 or stop < start or start < 0:
        raise argparse.ArgumentTypeError(f"grid needs 0 <= start <= stop and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _complex_json(z: complex) -> List[Optional[float]]:
    return [_finite_or_none(z.real), _finite_or_none(z.imag)]


def _finite_or_none(x: float) -> Optional[float]:
    return float(x) if math.isfinite(x) else None


def _emit_json(payload: Dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _load(args: argparse.Namespace) -> LevyModel:
    if args.params is None:
        raise ParameterValidationError("params", "a parameter file is required")
    return load_model(args.params)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_roots(args: argparse.Namespace) -> int:
    model = _load(args)
    rs = bracket_and_refine(model, args.q, args.side, args.n)
    if args.asymptotic:
        try:
            rs = dataclasses.replace(rs, tail=build_asymptotic_tail(model, args.q, args.side))
        except UnsupportedRegimeError as e:
            console.print(f"[yellow]⚠ No asymptotic rows: {e}[/yellow]")
    if args.out == "-":
        roots_to_csv(rs, sys.stdout, extra=args.asymptotic)
    else:
        with open(args.out, 'w', newline="") as f:
            roots_to_csv(rs, f, extra=args.asymptotic)
        console.print(f"[green]✓[/green] {rs.n_exact} roots written to {args.out}")
    problems = rs.check_interlacing()
    for problem in problems:
        console.print(f"[red]✗ {problem}[/red]")
    return EXIT_FAILURE if problems else EXIT_OK


def cmd_factor(args: argparse.Namespace) -> int:
    model = _load(args)
    z = args.z
    f = factorize(model, args.q, product_tol=args.tol, radius=max(abs(z), 1.0))
    residual: Optional[float]
    try:
        residual = factorization_residual(f, z)
    except WienerHopfError as e:
        console.print(f"[yellow]⚠ Residual not available at z = {z}: {e}[/yellow]")
        residual = None
    _emit_json({
        "schema_version": SCHEMA_VERSION,
        "q": args.q,
        "z": _complex_json(z),
        "sup_factor": _complex_json(product_factor(f.pos, z)),
        "inf_factor": _complex_json(product_factor(f.neg, z)),
        "residual": residual,
        "roots": {"pos": f.pos.n_exact, "neg": f.neg.n_exact},
    })
    return EXIT_OK


def cmd_sup_dist(args: argparse.Namespace) -> int:
    outputs = [part for part in args.out.split(",") if part]
    if len(outputs) != 2:
        raise ConfigurationError(f"--out needs law.json,cdf.csv, got {args.out!r}")
    law_path, csv_path = outputs
    if args.law is not None:
        law = load_law(args.law)
    else:
        model = _load(args)
        f = factorize(model, args.q, product_tol=args.tol)
        law = mixture_coefficients(f, args.side)
        save_law(law, law_path)
        console.print(f"[green]✓[/green] Law with c0={law.atom_c0:.6g} and {law.n_terms} terms written to {law_path}")
    with open(csv_path, 'w', newline="") as out:
        grid_to_csv(law, args.grid, out)
    console.print(f"[green]✓[/green] {args.grid.size} grid points written to {csv_path}")
    if law.tail_mass_bound > args.mass_tol:
        console.print(f"[yellow]⚠ Omitted mixture mass {law.tail_mass_bound:.3g} exceeds {args.mass_tol:g}[/yellow]")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    model = _load(args)
    summary = run_verification(model, args.suite, args.q_list, args.result_path,
                               n_roots=args.roots, n_points=args.points, seed=args.seed)
    return EXIT_FAILURE if summary["failed"] else EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load(args)
    cfg = SimConfig(n_paths=args.paths, n_series_terms=args.terms, time_grid_dt=args.dt,
                    rng_seed=args.seed, q=args.q)
    emp = simulate_sup(model, cfg)
    report: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "q": args.q,
        "n_paths": emp.n,
        "seed": args.seed,
        "atom_frequency": emp.atom_frequency,
        "mean": float(np.mean(emp.samples)),
    }
    if args.compare is not None:
        law = load_law(args.compare)
        if law.side != "pos" or not math.isclose(law.q, args.q):
            raise ConfigurationError(f"law in {args.compare} is for q={law.q:g} side {law.side}, "
                                     f"simulation is for q={args.q:g} side pos")
        emp = ks_test(emp, lambda x: sup_cdf(law, x))
        report.update({"ks": emp.ks, "p_value": emp.p_value, "law_atom": law.atom_c0})
        console.print(f"[cyan]KS:[/cyan] {emp.ks:.4g} (p = {emp.p_value:.3g})")
    if args.dump is not None:
        dump_samples(emp, args.dump)
        console.print(f"[green]✓[/green] Samples written to {args.dump}")
    _emit_json(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='theta-wiener-hopf',
        description='Wiener-Hopf factors and supremum laws of theta-family Levy processes',
        epilog='Exit codes: 0 success, 1 verification or numerical failure, 2 invalid input'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_common(sub: argparse.ArgumentParser, q: bool = True, params_required: bool = True) -> None:
        sub.add_argument('--params', type=str, required=params_required, default=None,
                         help='Path to the JSON parameter file')
        if q:
            sub.add_argument('--q', type=_positive_float, default=1.0, help='Killing rate (default: 1.0)')

    roots = subparsers.add_parser('roots', help='Refine the first roots of phi(zeta) = q on one side')
    add_common(roots)
    roots.add_argument('--side', choices=SIDES, default="pos", help='Side (default: pos)')
    roots.add_argument('--n', type=int, default=50, help='Number of roots (default: 50)')
    roots.add_argument('--asymptotic', type=int, default=0,
                       help='Append this many rows from the asymptotic expansion (default: 0)')
    roots.add_argument('--out', type=str, default="-", help='CSV output path, "-" for stdout (default: -)')
    roots.set_defaults(handler=cmd_roots)

    factor = subparsers.add_parser('factor', help='Evaluate both Wiener-Hopf factors at a complex point')
    add_common(factor)
    factor.add_argument('--z', type=parse_complex, required=True, help='Point as "a+bi"')
    factor.add_argument('--tol', type=_positive_float, default=1e-8,
                        help='Relative accuracy of the products (default: 1e-8)')
    factor.set_defaults(handler=cmd_factor)

    sup_dist = subparsers.add_parser('sup-dist', help='Mixture law of the supremum and its CDF on a grid')
    add_common(sup_dist, params_required=False)
    sup_dist.add_argument('--side', choices=SIDES, default="pos", help='"pos" for S, "neg" for -I (default: pos)')
    sup_dist.add_argument('--grid', type=parse_grid, default=parse_grid("0:5:0.01"),
                          help='Grid start:stop:step (default: 0:5:0.01)')
    sup_dist.add_argument('--out', type=str, default="law.json,cdf.csv",
                          help='Law JSON and grid CSV paths (default: law.json,cdf.csv)')
    sup_dist.add_argument('--law', type=str, default=None,
                          help='Reuse a saved law instead of computing one (only the CSV is written)')
    sup_dist.add_argument('--tol', type=_positive_float, default=1e-8,
                          help='Relative accuracy of the products (default: 1e-8)')
    sup_dist.add_argument('--mass-tol', type=_positive_float, default=1e-4,
                          help='Warn when the omitted mixture mass exceeds this (default: 1e-4)')
    sup_dist.set_defaults(handler=cmd_sup_dist)

    verify = subparsers.add_parser('verify', help='Run the verification suites')
    add_common(verify, q=False)
    verify.add_argument('--suite', choices=SUITES + ("all",), default="all", help='Suite to run (default: all)')
    verify.add_argument('--q-list', type=parse_q_list, default=list(DEFAULT_Q_LIST),
                        help='Comma-separated killing rates (default: 0.1,1,10)')
    verify.add_argument('--roots', type=int, default=50, help='Roots per side for interlacing (default: 50)')
    verify.add_argument('--points', type=int, default=50, help='Random points for factorization (default: 50)')
    verify.add_argument('--seed', type=int, default=0, help='Seed for the random test points (default: 0)')
    verify.add_argument('--result-path', type=str, default="verify_result.json",
                        help='Where to write the JSON summary (default: verify_result.json)')
    verify.set_defaults(handler=cmd_verify)

    simulate = subparsers.add_parser('simulate', help='Monte Carlo sample of the supremum')
    add_common(simulate)
    simulate.add_argument('--paths', type=int, default=10_000, help='Number of paths (default: 10000)')
    simulate.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    simulate.add_argument('--dt', type=_positive_float, default=1e-3, help='Diffusion grid step (default: 1e-3)')
    simulate.add_argument('--terms', type=int, default=200,
                          help='Exponential terms per side simulated as jumps (default: 200)')
    simulate.add_argument('--compare', type=str, default=None, help='Law JSON to run a KS test against')
    simulate.add_argument('--dump', type=str, default=None, help='Write the raw sample to this path')
    simulate.set_defaults(handler=cmd_simulate)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map errors to exit codes.

    :param argv: Arguments without the program name (defaults to sys.argv[1:])
    :type argv: Optional[Sequence[str]]
    :return: Exit code
    :rtype: int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK

    try:
        return int(args.handler(args))
    except ParameterValidationError as e:
        console.print(f"[red]✗ Invalid parameter '{e.field}': {e}[/red]")
        return EXIT_INVALID
    except (ConfigurationError, DomainError) as e:
        console.print(f"[red]✗ {type(e).__name__}: {e}[/red]")
        return EXIT_INVALID
    except WienerHopfError as e:
        console.print(f"[red]✗ {type(e).__name__}: {e}[/red]")
        return EXIT_FAILURE
    except (ValueError, ArithmeticError) as e:
        console.print(f"[red]✗ Numerical failure: {type(e).__name__}: {e}[/red]")
        return EXIT_FAILURE
    except OSError as e:
        console.print(f"[red]✗ {e}[/red]")
        return EXIT_INVALID


def main() -> None:
    """
    Main entry point for the command line interface.
    """
    sys.exit(run())


if __name__ == '__main__':
    main()
