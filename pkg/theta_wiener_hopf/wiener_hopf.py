#!/usr/bin/env python3
"""
Wiener-Hopf factors and supremum laws from the root sets of both sides.

With zeta_n, rho_n the roots and poles of the positive side,

    E[exp(-z S)] = prod_n (1 + z/rho_n) / (1 + z/zeta_n),   Re z > 0,

and the same product over the negative-side roots gives E[exp(z I)]. Expanding the
product in partial fractions turns the law of S into a mixture of an atom at 0 and
exponential distributions with rates zeta_n.
"""

import csv
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, TextIO, Tuple, Union

import numpy as np
from rich.console import Console

from theta_wiener_hopf.errors import DomainError, SingularityError, StructuralError
from theta_wiener_hopf.model import SCHEMA_VERSION
from theta_wiener_hopf.model_base import SIDES, LevyModel
from theta_wiener_hopf.roots import ModelLike, RootSet, TailSums, as_model, roots_to_accuracy, tail_sums

console = Console(stderr=True)

NEGATIVE_WEIGHT_TOL = 1e-12
MASS_TOL = 1e-9
# Far-field roots multiplied exactly in the weights, as a multiple of the refined count
NEAR_FIELD_FACTOR = 16


@dataclass(frozen=True)
class WhFactorization:
    """
    Both root sets of one killing rate.

    :param q: Killing rate
    :type q: float
    :param pos: Positive-side roots (supremum)
    :type pos: RootSet
    :param neg: Negative-side roots (infimum), stored positive
    :type neg: RootSet
    :param product_tol: Relative accuracy the root counts were chosen for
    :type product_tol: float
    :param model: Model the roots were computed for, used by the residual check
    :type model: LevyModel
    """

    q: float
    pos: RootSet
    neg: RootSet
    product_tol: float
    model: LevyModel

    def roots(self, side: str) -> RootSet:
        if side not in SIDES:
            raise DomainError(f"side must be one of {SIDES}, got {side!r}")
        return self.pos if side == "pos" else self.neg


@dataclass(frozen=True)
class SupremumLaw:
    """
    Atom at zero plus a finite mixture of exponentials.

    :param q: Killing rate
    :type q: float
    :param side: "pos" for S, "neg" for -I
    :type side: str
    :param atom_c0: P(S = 0)
    :type atom_c0: float
    :param weights: Mixture weights c_n
    :type weights: np.ndarray
    :param rates: Exponential rates zeta_n
    :type rates: np.ndarray
    :param tail_mass_bound: 1 - c0 - sum c_n, the mass of the omitted components
    :type tail_mass_bound: float
    :param tail_rate: Smallest rate among the omitted components (inf if none)
    :type tail_rate: float
    """

    q: float
    side: str
    atom_c0: float
    weights: np.ndarray
    rates: np.ndarray
    tail_mass_bound: float
    tail_rate: float = math.inf

    @property
    def n_terms(self) -> int:
        return int(self.weights.size)


def factorize(p: ModelLike, q: float, product_tol: float = 1e-8, radius: float = 10.0) -> WhFactorization:
    """
    Compute both root sets to the requested product accuracy.

    :param p: Family or model
    :type p: ModelLike
    :param q: Killing rate
    :type q: float
    :param product_tol: Relative accuracy of factor values at |z| <= radius
    :type product_tol: float
    :param radius: Largest |z| factors will be evaluated at
    :type radius: float
    :return: Factorization
    :rtype: WhFactorization
    """
    model = as_model(p)
    pos = roots_to_accuracy(model, q, "pos", product_tol, radius)
    neg = roots_to_accuracy(model, q, "neg", product_tol, radius)
    return WhFactorization(q=q, pos=pos, neg=neg, product_tol=product_tol, model=model)


def _sums(rs: RootSet) -> TailSums:
    return rs.tail_sums if rs.tail_sums is not None else TailSums()


def product_factor(rs: RootSet, z: complex) -> complex:
    """
    prod (1 + z/rho_n)/(1 + z/zeta_n) over the stored roots with the tail folded in
    through its first two moments; no domain check.
    """
    z = complex(z)
    if z == 0:
        return 1.0 + 0j
    terms = np.concatenate((np.log1p(z / rs.poles.astype(complex)), -np.log1p(z / rs.zeros.astype(complex))))
    sums = _sums(rs)
    terms = np.append(terms, -z * sums.first + 0.5 * z * z * sums.second)
    return complex(np.exp(complex(math.fsum(terms.real), math.fsum(terms.imag))))


def wh_factor(f: WhFactorization, z: complex, side: str) -> complex:
    """
    Wiener-Hopf factor E[exp(-z S)] (side "pos") or E[exp(z I)] (side "neg").

    :param f: Factorization
    :type f: WhFactorization
    :param z: Point with Re z > 0
    :type z: complex
    :param side: "pos" or "neg"
    :type side: str
    :return: Factor value
    :rtype: complex
    :raises DomainError: If Re z <= 0
    """
    z = complex(z)
    if not z.real > 0:
        raise DomainError(f"Wiener-Hopf factors need Re z > 0, got {z}")
    return product_factor(f.roots(side), z)


def factorization_residual(f: WhFactorization, z: complex) -> float:
    """
    Relative mismatch |q/(q - phi(z)) - phi_q^+(-z) phi_q^-(z)| / |q/(q - phi(z))|.

    :raises SingularityError: At a root of q - phi or a pole of phi
    """
    z = complex(z)
    if z == 0:
        return 0.0
    denominator = f.q - f.model.laplace_exponent(z)
    if denominator == 0:
        raise SingularityError(f"z = {z} is a root of q - phi")
    lhs = f.q / denominator
    rhs = product_factor(f.pos, -z) * product_factor(f.neg, z)
    return abs(lhs - rhs) / abs(lhs)


def _log_abs_differences(rs: RootSet, n: int) -> Tuple[float, int]:
    """
    ln|1 - zeta_n/rho_k| summed over stored poles and ln|1 - zeta_n/zeta_k| over stored
    roots k != n, with the number of negative factors in each.
    """
    zeta = rs.zeros[n]
    anchor, offset = rs.anchors[n], rs.offsets[n]
    pole_diff = rs.poles - zeta
    if anchor >= 1 and anchor <= rs.poles.size:
        pole_diff[anchor - 1] = -offset
    root_diff = rs.zeros - zeta
    same = rs.anchors == anchor
    root_diff[same] = rs.offsets[same] - offset
    root_diff = np.delete(root_diff, n)
    others = np.delete(rs.zeros, n)
    num = np.log(np.abs(pole_diff / rs.poles))
    den = np.log(np.abs(root_diff / others))
    negatives = int(np.sum(pole_diff < 0)) + int(np.sum(root_diff < 0))
    return math.fsum(num) - math.fsum(den), negatives


def mixture_coefficients(f: WhFactorization, side: str, n_terms: Optional[int] = None) -> SupremumLaw:
    """
    Mixture representation of the law of S (side "pos") or -I (side "neg").

    c_n = prod_k (1 - zeta_n/rho_k) / prod_{k != n} (1 - zeta_n/zeta_k), evaluated in
    log-space with sign counting; roots beyond the refined prefix enter through the
    asymptotic tail (exactly in a near field, by moment sums further out).

    :param f: Factorization
    :type f: WhFactorization
    :param side: "pos" or "neg"
    :type side: str
    :param n_terms: Number of weights (defaults to every refined root)
    :type n_terms: Optional[int]
    :return: Mixture law
    :rtype: SupremumLaw
    :raises StructuralError: If a weight is negative beyond rounding noise
    """
    rs = f.roots(side)
    n_exact = rs.n_exact
    if n_terms is None:
        n_terms = n_exact
    if not 0 <= n_terms <= n_exact:
        raise DomainError(f"n_terms must lie in [0, {n_exact}], got {n_terms}")

    far_zeros = far_poles = np.zeros(0)
    far = _sums(rs)
    if rs.tail is not None:
        horizon = NEAR_FIELD_FACTOR * max(n_exact, 1)
        k = np.arange(n_exact + 1, horizon + 1, dtype=float)
        far_zeros, far_poles = rs.tail.roots(k), rs.tail.poles(k)
        far = tail_sums(rs.tail, horizon)

    weights = np.zeros(n_terms)
    for n in range(n_terms):
        zeta = rs.zeros[n]
        log_abs, negatives = _log_abs_differences(rs, n)
        if far_zeros.size:
            log_abs += math.fsum(np.log1p(-zeta / far_poles) - np.log1p(-zeta / far_zeros))
        log_abs += zeta * far.first + 0.5 * zeta * zeta * far.second
        weights[n] = (-1.0 if negatives % 2 else 1.0) * math.exp(log_abs)

    worst = float(weights.min()) if weights.size else 0.0
    if worst < -NEGATIVE_WEIGHT_TOL:
        index = int(np.argmin(weights)) + 1
        raise StructuralError(f"mixture weight c_{index} = {worst!r} is negative (root accuracy problem)")
    if worst < 0:
        console.print(f"[yellow]⚠ Clamped {int(np.sum(weights < 0))} slightly negative mixture weights to 0[/yellow]")
        weights = np.maximum(weights, 0.0)

    atom = _atom(rs)
    mass = 1.0 - atom - math.fsum(weights)
    if mass < -MASS_TOL:
        console.print(f"[yellow]⚠ Mixture mass exceeds 1 by {-mass:.3g}[/yellow]")
    if n_terms < n_exact:
        tail_rate = float(rs.zeros[n_terms])
    elif rs.tail is not None:
        tail_rate = rs.tail.root(n_exact + 1)
    else:
        tail_rate = math.inf
    return SupremumLaw(q=f.q, side=side, atom_c0=atom, weights=weights, rates=rs.zeros[:n_terms].copy(),
                       tail_mass_bound=mass, tail_rate=tail_rate)


def _atom(rs: RootSet) -> float:
    """P(S = 0) = lim prod zeta_k/rho_k; zero when roots outnumber poles."""
    if rs.complete and rs.zeros.size > rs.poles.size:
        return 0.0
    sums = _sums(rs)
    if sums.log_ratio == -math.inf:
        return 0.0
    count = min(rs.zeros.size, rs.poles.size)
    return math.exp(math.fsum(np.log(rs.zeros[:count] / rs.poles[:count])) + sums.log_ratio)


def partial_atom_products(rs: RootSet) -> np.ndarray:
    """Partial products prod_{k <= N} zeta_k/rho_k for N = 1 .. stored count."""
    count = min(rs.zeros.size, rs.poles.size)
    return np.exp(np.cumsum(np.log(rs.zeros[:count] / rs.poles[:count])))


Number = Union[float, np.ndarray]


def _check_nonnegative(x: Number) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if np.any(values < 0):
        raise DomainError(f"the supremum law lives on [0, inf), got x = {x}")
    return values


def sup_cdf(law: SupremumLaw, x: Number) -> Number:
    """
    P(S <= x) = c0 + sum c_n (1 - exp(-zeta_n x)), clamped to [0, 1].

    :raises DomainError: For negative x
    """
    values = _check_nonnegative(x)
    grid = np.atleast_1d(values)
    mass = -np.expm1(-np.outer(grid, law.rates)) @ law.weights
    result = np.clip(law.atom_c0 + mass, 0.0, 1.0)
    return float(result[0]) if np.ndim(values) == 0 else result


def sup_density(law: SupremumLaw, x: Number) -> Number:
    """
    Density sum c_n zeta_n exp(-zeta_n x) of the absolutely continuous part.

    :raises DomainError: For negative x
    """
    values = _check_nonnegative(x)
    grid = np.atleast_1d(values)
    result = np.exp(-np.outer(grid, law.rates)) @ (law.weights * law.rates)
    return float(result[0]) if np.ndim(values) == 0 else result


def mixture_transform(law: SupremumLaw, z: complex, include_tail: bool = True) -> complex:
    """
    Laplace transform c0 + sum c_n zeta_n/(zeta_n + z) implied by the mixture.

    With include_tail the omitted mass is placed at the smallest omitted rate.
    """
    z = complex(z)
    value = law.atom_c0 + complex(np.sum(law.weights * law.rates / (law.rates + z)))
    if include_tail and math.isfinite(law.tail_rate) and law.tail_mass_bound > 0:
        value += law.tail_mass_bound * law.tail_rate / (law.tail_rate + z)
    return value


def law_to_json(law: SupremumLaw) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "q": law.q,
        "side": law.side,
        "c0": law.atom_c0,
        "terms": [{"zeta": float(zeta), "c": float(c)} for zeta, c in zip(law.rates, law.weights)],
        "tail_mass_bound": law.tail_mass_bound,
        "tail_rate": law.tail_rate if math.isfinite(law.tail_rate) else None,
    }


def law_from_json(data: Dict[str, Any]) -> SupremumLaw:
    """
    Rebuild a SupremumLaw from law_to_json output.

    :raises DomainError: On an unsupported schema version or missing keys
    """
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DomainError(f"unsupported law schema_version {version!r}")
    try:
        terms: List[Dict[str, float]] = data["terms"]
        tail_rate = data.get("tail_rate")
        return SupremumLaw(
            q=float(data["q"]), side=str(data["side"]), atom_c0=float(data["c0"]),
            weights=np.array([term["c"] for term in terms], dtype=float),
            rates=np.array([term["zeta"] for term in terms], dtype=float),
            tail_mass_bound=float(data["tail_mass_bound"]),
            tail_rate=math.inf if tail_rate is None else float(tail_rate))
    except KeyError as e:
        raise DomainError(f"law file is missing key {e}")


def save_law(law: SupremumLaw, path: str) -> None:
    with open(path, 'w') as f:
        json.dump(law_to_json(law), f, indent=2)


def load_law(path: str) -> SupremumLaw:
    with open(path, 'r') as f:
        return law_from_json(json.load(f))


def grid_to_csv(law: SupremumLaw, grid: np.ndarray, out: TextIO) -> None:
    """Write x, cdf, density rows with 17 significant digits."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", "cdf", "density"])
    cdf = np.atleast_1d(sup_cdf(law, grid))
    density = np.atleast_1d(sup_density(law, grid))
    for x, F, d in zip(np.atleast_1d(grid), cdf, density):
        writer.writerow([f"{x:.17g}", f"{F:.17g}", f"{d:.17g}"])
