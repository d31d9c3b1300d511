#!/usr/bin/env python3
"""
Solutions of phi(zeta) = q on the positive half-line.

Zeros and poles interlace, 0 < zeta_1 < rho_1 < zeta_2 < rho_2 < ..., so every root is
bracketed by two consecutive poles. Roots are stored as a pole anchor plus a signed
offset, which keeps their distance to the nearest pole exact even when that distance
is far below the float spacing of the pole itself. Beyond the refined prefix the
large-n expansions of each family take over (AsymptoticTail).
"""

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, TextIO, Tuple, Union

import numpy as np
from rich.console import Console

from theta_wiener_hopf.errors import DomainError, StructuralError, UnsupportedRegimeError
from theta_wiener_hopf.model import ThetaFamily, ThetaProcess
from theta_wiener_hopf.model_base import SIDES, LevyModel

console = Console(stderr=True)

RESIDUAL_TOL = 1e-10
BRACKET_GUARD = 1e-12
BISECTION_WIDTH = 1e-6
NEWTON_STEP = 1e-7
NEWTON_TARGET = 1e-13
MAX_ITERATIONS = 200
SEARCH_CAP = 1e12

VALIDATION_TOL = 1e-8
VALIDATION_START = 8
VALIDATION_LIMIT = 2 ** 14
SIDE_TEST_INTERVAL = 128
TAIL_HORIZON = 2 ** 20
LADDER_START = 16
LADDER_LIMIT = 2 ** 16

ModelLike = Union[ThetaFamily, LevyModel]


def as_model(p: ModelLike) -> LevyModel:
    """Wrap a ThetaFamily into a ThetaProcess; models pass through."""
    if isinstance(p, ThetaFamily):
        return ThetaProcess(p)
    return p


def _check_args(q: float, side: str) -> None:
    if not q > 0:
        raise DomainError(f"killing rate q must be positive, got {q}")
    if side not in SIDES:
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")


# ---------------------------------------------------------------------------
# Asymptotic expansions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TemplateParams:
    """
    Parameters substituted into an expansion template.

    own/other refer to the side whose poles the roots track and the opposite side.
    """

    c: float
    alpha: float
    beta: float
    c_other: float
    beta_other: float
    mu: float
    rho_drift: float
    gamma: float
    sigma: float
    q: float


# (chi, regime) -> (order p of the neglected terms, log factor in the error)
EXPANSION_ORDERS: Dict[Tuple[float, str], Tuple[float, bool]] = {
    (0.5, "diffusive"): (8.0, False),
    (0.5, "drift"): (5.0, False),
    (1.0, "diffusive"): (7.0, False),
    (1.0, "drift"): (4.0, True),
    (1.5, "diffusive"): (6.0, False),
    (1.5, "drift"): (2.0, False),
    (2.0, "diffusive"): (3.0, True),
    (2.5, "diffusive"): (2.0, False),
    (2.5, "pure"): (1.0, False),
}

TEMPLATE_NAMES = ("mirrored-own", "mirrored-other", "literal-own", "literal-other")


def expansion_regime(chi: float, sigma: float) -> str:
    """Regime label of the large-root expansion."""
    if sigma != 0:
        return "diffusive"
    if chi == 2.5:
        return "pure"
    if chi == 2.0:
        raise UnsupportedRegimeError("no large-root expansion exists for chi = 2 with sigma = 0")
    return "drift"


def template_offset(chi: float, regime: str, t: TemplateParams, m: np.ndarray) -> np.ndarray:
    """
    Distance of the expanded root from alpha + beta m^2, vectorized over pole integers m.

    :param chi: Singularity order
    :type chi: float
    :param regime: "diffusive", "drift" or "pure"
    :type regime: str
    :param t: Substituted parameters
    :type t: TemplateParams
    :param m: Pole integers (large)
    :type m: np.ndarray
    :return: Root offsets
    :rtype: np.ndarray
    :raises UnsupportedRegimeError: If the regime has no expansion
    """
    m = np.asarray(m, dtype=float)
    c, beta, c_o, beta_o = t.c, t.beta, t.c_other, t.beta_other
    if regime == "diffusive":
        s2 = t.sigma ** 2
        if chi in (0.5, 1.0, 1.5):
            lead = {0.5: 4.0, 1.0: 3.0, 1.5: 2.0}[chi]
            return ((4.0 / s2) * (c / beta) * m ** -lead
                    + (8.0 / s2 ** 2) * (c / beta ** 2) * (t.mu - t.alpha * s2) * m ** -(lead + 2.0))
        if chi == 2.0:
            return (4.0 / s2) * (c / beta) / m
        return (4.0 / s2) * (c / beta) - (8.0 * math.pi / s2 ** 2) * (c * c_o / (beta * beta_o) ** 1.5) / m
    if regime == "drift":
        if t.mu == 0:
            raise UnsupportedRegimeError("large-root expansion without diffusion needs a nonzero drift")
        mu = t.mu
        if chi == 0.5:
            return (-(2.0 * c / mu) * m ** -2.0
                    + (2.0 / mu ** 2) * (c / beta) * (mu * t.alpha + t.gamma + t.q) * m ** -4.0)
        if chi == 1.0:
            c0 = mu * t.alpha - t.gamma + t.q + (c_o * math.log(beta / beta_o) if c_o > 0 else 0.0)
            return (-(2.0 * c / mu) / m
                    + (2.0 / mu ** 2) * (c / beta) * (2.0 * (c + c_o) * np.log(m) + c0) * m ** -3.0)
        if chi == 1.5:
            return -2.0 * c / mu + (2.0 * math.pi / mu ** 2) * (c * c_o / math.sqrt(beta * beta_o)) / m
    if regime == "pure" and chi == 2.5:
        w0 = w0_phase(c, beta, c_o, beta_o)
        shift = ((2.0 * t.rho_drift / math.pi ** 2) * c * beta ** 2 * beta_o ** 3
                 / (c_o ** 2 * beta ** 3 + c ** 2 * beta_o ** 3))
        return beta * (2.0 * m * w0 + w0 * w0) + shift
    raise UnsupportedRegimeError(f"no large-root expansion for chi = {chi} in regime {regime!r}")


def template_root(chi: float, regime: str, t: TemplateParams, m: np.ndarray) -> np.ndarray:
    """Expanded root attached to pole integer m."""
    m = np.asarray(m, dtype=float)
    return t.alpha + t.beta * m * m + template_offset(chi, regime, t, m)


def w0_phase(c: float, beta: float, c_other: float, beta_other: float) -> float:
    """Phase w0 of the chi = 5/2 pure-jump roots, zeta ~ beta (m + w0)^2."""
    return math.atan2(c * beta_other ** 1.5, c_other * beta ** 1.5) / math.pi


def _template_params(family: ThetaFamily, name: str, q: float) -> TemplateParams:
    """Substitution for one of TEMPLATE_NAMES; the family is the one whose positive roots are wanted."""
    mirrored = name.startswith("mirrored")
    own, other = (1, 2) if name.endswith("own") else (2, 1)
    c, alpha, beta = family.side_params(own)
    c_o, _, beta_o = family.side_params(other)
    sign = -1.0 if mirrored else 1.0
    assert family.gamma is not None and family.rho_drift is not None
    return TemplateParams(c=c, alpha=alpha, beta=beta, c_other=c_o, beta_other=beta_o,
                          mu=sign * family.mu, rho_drift=sign * family.rho_drift,
                          gamma=family.gamma, sigma=family.sigma, q=q)


@dataclass(frozen=True)
class AsymptoticTail:
    """
    Validated large-index description of the roots of one side.

    :param chi: Singularity order
    :type chi: float
    :param regime: "diffusive", "drift" or "pure"
    :type regime: str
    :param template: Which parameter substitution passed validation
    :type template: str
    :param params: Substituted parameters
    :type params: TemplateParams
    :param above: Whether roots sit above their pole (zeta_n ~ rho_{n-1}) or below it
    :type above: bool
    :param first_m: Pole integer of rho_1
    :type first_m: int
    :param pole_alpha: alpha of the tracked poles
    :type pole_alpha: float
    :param pole_beta: beta of the tracked poles
    :type pole_beta: float
    :param validated_from: Index from which the expansion agrees with refined roots
    :type validated_from: int
    :param order: Order p of the neglected terms, O(n^-p)
    :type order: float
    :param log_factor: Whether the neglected terms carry an extra ln(n)
    :type log_factor: bool
    """

    chi: float
    regime: str
    template: str
    params: TemplateParams
    above: bool
    first_m: int
    pole_alpha: float
    pole_beta: float
    validated_from: int
    order: float
    log_factor: bool

    def pole_integers(self, n: np.ndarray) -> np.ndarray:
        return np.asarray(n) - 1 + self.first_m - (1 if self.above else 0)

    def anchor_index(self, n: int) -> int:
        """Index of the pole the n-th root hugs."""
        return n - 1 if self.above else n

    def poles(self, n: np.ndarray) -> np.ndarray:
        m = np.asarray(n, dtype=float) - 1 + self.first_m
        return self.pole_alpha + self.pole_beta * m * m

    def roots(self, n: np.ndarray) -> np.ndarray:
        """Expansion values of zeta_n for an array of root indices."""
        return template_root(self.chi, self.regime, self.params, self.pole_integers(n))

    def root(self, n: int) -> float:
        return float(self.roots(np.array([n]))[0])

    def anchored_offset(self, n: int) -> float:
        """Expansion of zeta_n minus its anchor pole, without forming zeta_n."""
        m = self.pole_integers(np.array([n], dtype=float))
        template_pole = self.params.alpha + self.params.beta * m * m
        tracked_pole = self.pole_alpha + self.pole_beta * m * m
        offset = template_offset(self.chi, self.regime, self.params, m)
        return float((template_pole - tracked_pole + offset)[0])


# ---------------------------------------------------------------------------
# Root sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailSums:
    """
    Sums over the roots and poles beyond the stored prefix.

    :param first: sum_{n>N} (1/zeta_n - 1/rho_n)
    :type first: float
    :param second: sum_{n>N} (1/zeta_n^2 - 1/rho_n^2)
    :type second: float
    :param log_ratio: sum_{n>N} ln(zeta_n/rho_n), -inf when the product diverges to 0
    :type log_ratio: float
    :param first_bound: Error bound on first
    :type first_bound: float
    :param cubic: sum_{n>N} (1/zeta_n^3 + 1/rho_n^3), for third-order bounds
    :type cubic: float
    """

    first: float = 0.0
    second: float = 0.0
    log_ratio: float = 0.0
    first_bound: float = 0.0
    cubic: float = 0.0

    def factor_bound(self, radius: float, next_zero: float) -> float:
        """Bound on the log-factor error at |z| <= radius from dropping third and higher orders."""
        if self.cubic == 0:
            return radius * self.first_bound
        if radius >= next_zero:
            return math.inf
        return radius * self.first_bound + 2.0 * radius ** 3 * self.cubic / (3.0 * (1.0 - radius / next_zero))


@dataclass(frozen=True)
class RootSet:
    """
    Refined roots of phi(zeta) = q on one side.

    Negative-side roots are stored as positive numbers (roots of the mirrored process).

    :param q: Killing rate
    :type q: float
    :param side: "pos" or "neg"
    :type side: str
    :param zeros: zeta_1 < zeta_2 < ... (refined prefix)
    :type zeros: np.ndarray
    :param anchors: Pole index each root is anchored to (0 is the origin)
    :type anchors: np.ndarray
    :param offsets: zeta_n - pole(anchor_n), exact to working precision
    :type offsets: np.ndarray
    :param poles: rho_1 < rho_2 < ... matching the prefix
    :type poles: np.ndarray
    :param residuals: |phi(zeta_n) - q|
    :type residuals: np.ndarray
    :param tail: Asymptotic description beyond the prefix, if validated
    :type tail: Optional[AsymptoticTail]
    :param complete: True when the prefix holds every root (finite models)
    :type complete: bool
    :param tail_sums: Sums over the indices beyond the prefix
    :type tail_sums: Optional[TailSums]
    """

    q: float
    side: str
    zeros: np.ndarray
    anchors: np.ndarray
    offsets: np.ndarray
    poles: np.ndarray
    residuals: np.ndarray
    tail: Optional[AsymptoticTail] = None
    complete: bool = False
    tail_sums: Optional[TailSums] = None
    radius: float = 0.0
    sources: List[str] = field(default_factory=list)

    @property
    def n_exact(self) -> int:
        return int(self.zeros.size)

    def check_interlacing(self) -> List[str]:
        """Violations of 0 < zeta_1 < rho_1 < zeta_2 < ..., empty when interlacing holds."""
        problems = []
        previous = 0.0
        for n, zeta in enumerate(self.zeros, start=1):
            if not zeta > previous:
                problems.append(f"zeta_{n} = {zeta!r} is not above {previous!r}")
            if n <= self.poles.size:
                if not self.poles[n - 1] > zeta:
                    problems.append(f"rho_{n} = {self.poles[n - 1]!r} is not above zeta_{n} = {zeta!r}")
                previous = self.poles[n - 1]
        return problems


def _guard_offset(f: Callable[[float], float], pole: float, direction: float) -> float:
    """Offset just inside a bracket end at which f has the expected sign."""
    guard = BRACKET_GUARD * max(pole, 1.0)
    for _ in range(4):
        t = direction * guard
        value = f(t)
        if (direction > 0 and value < 0) or (direction < 0 and value > 0):
            return t
        guard *= 1e-3
    raise StructuralError(
        f"sign condition fails next to pole {pole!r}: phi - q = {value!r} at offset {t!r} "
        f"(expected {'negative' if direction > 0 else 'positive'})")


def _refine(f: Callable[[float], float], lo: float, hi: float, scale: float) -> Tuple[float, float]:
    """
    Root of an increasing-through-zero function in [lo, hi] with f(lo) < 0 < f(hi).

    Bisection (geometric when the bracket spans decades on one side of zero) down to
    BISECTION_WIDTH * scale, then Newton with a central-difference slope, kept inside
    the bracket.
    """
    for _ in range(MAX_ITERATIONS):
        if hi - lo <= BISECTION_WIDTH * scale:
            break
        if lo > 0 and hi > 4.0 * lo:
            mid = math.sqrt(lo * hi)
        elif hi < 0 and lo < 4.0 * hi:
            mid = -math.sqrt(lo * hi)
        else:
            mid = 0.5 * (lo + hi)
        value = f(mid)
        if value == 0:
            return mid, 0.0
        if value < 0:
            lo = mid
        else:
            hi = mid

    eps = float(np.finfo(float).eps)
    step = NEWTON_STEP * (hi - lo)
    t = 0.5 * (lo + hi)
    best_t, best_value = t, math.inf
    for _ in range(MAX_ITERATIONS):
        value = f(t)
        if abs(value) < abs(best_value):
            best_t, best_value = t, value
        if abs(value) <= NEWTON_TARGET:
            break
        # t is strictly inside the bracket here
        h = min(step, 0.5 * (t - lo), 0.5 * (hi - t))
        slope = (f(t + h) - f(t - h)) / (2.0 * h) if h > 0 else 0.0
        if value < 0:
            lo = t
        else:
            hi = t
        candidate = t - value / slope if slope > 0 else math.nan
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - t) <= 4.0 * eps * abs(t):
            break
        t = candidate
    return best_t, abs(best_value)


def solve_interval(model: LevyModel, q: float, n: int) -> Optional[Tuple[int, float, float]]:
    """
    Root of phi = q in the n-th interval (rho_{n-1}, rho_n), rho_0 = 0.

    For finite models the interval after the last pole is unbounded; None means it holds
    no root.

    :return: (anchor, offset, residual)
    :rtype: Optional[Tuple[int, float, float]]
    :raises StructuralError: If the bracket sign condition fails
    """
    n_poles = model.n_poles
    left_anchor = n - 1
    left = model.pole(left_anchor)

    def f_left(t: float) -> float:
        return model.phi_anchored(left_anchor, t) - q

    if n_poles is not None and n > n_poles:
        if n > n_poles + 1:
            return None
        lo = _guard_offset(f_left, left, 1.0) if left_anchor > 0 else 0.0
        upper = max(1.0, left)
        while f_left(upper) <= 0:
            upper *= 2.0
            if upper > SEARCH_CAP:
                return None
        offset, residual = _refine(f_left, lo, upper, left + upper)
        return left_anchor, offset, residual

    right = model.pole(n)
    half = 0.5 * (right - left)
    if f_left(half) > 0:
        lo = _guard_offset(f_left, left, 1.0) if left_anchor > 0 else 0.0
        offset, residual = _refine(f_left, lo, half, right)
        return left_anchor, offset, residual

    def f_right(t: float) -> float:
        return model.phi_anchored(n, t) - q

    hi = _guard_offset(f_right, right, -1.0)
    offset, residual = _refine(f_right, -half, hi, right)
    return n, offset, residual


def _root_count(model: LevyModel, n_max: int) -> int:
    n_poles = model.n_poles
    return n_max if n_poles is None else min(n_max, n_poles + 1)


def bracket_and_refine(p: ModelLike, q: float, side: str, n_roots: int) -> RootSet:
    """
    First n_roots solutions of phi(zeta) = q on one side, bracketed by interlacing.

    :param p: Family or model
    :type p: ModelLike
    :param q: Killing rate
    :type q: float
    :param side: "pos" or "neg"
    :type side: str
    :param n_roots: Number of roots (finite models may have fewer)
    :type n_roots: int
    :return: Refined roots without tail information
    :rtype: RootSet
    :raises StructuralError: If a bracket fails its sign condition
    """
    _check_args(q, side)
    if n_roots < 1:
        raise DomainError(f"number of roots must be at least 1, got {n_roots}")
    model = as_model(p).side(side)
    anchors, offsets, residuals, zeros = [], [], [], []
    for n in range(1, _root_count(model, n_roots) + 1):
        found = solve_interval(model, q, n)
        if found is None:
            break
        anchor, offset, residual = found
        anchors.append(anchor)
        offsets.append(offset)
        residuals.append(residual)
        zeros.append(model.pole(anchor) + offset)
    n_poles = model.n_poles
    complete = n_poles is not None and n_roots > n_poles
    pole_count = len(zeros) if n_poles is None else min(len(zeros), n_poles)
    poles = np.array([model.pole(n) for n in range(1, pole_count + 1)])
    return RootSet(q=q, side=side, zeros=np.array(zeros), anchors=np.array(anchors, dtype=int),
                   offsets=np.array(offsets), poles=poles, residuals=np.array(residuals),
                   complete=complete, tail_sums=TailSums() if complete else None,
                   sources=["exact"] * len(zeros))


def build_asymptotic_tail(p: ModelLike, q: float, side: str) -> AsymptoticTail:
    """
    Pick the expansion template that reproduces refined roots of the requested side.

    Templates are tried in TEMPLATE_NAMES order on a doubling index ladder; the first
    index n where the expansion matches the refined root to 1e-8 * rho_n, confirmed at
    2n, becomes validated_from.

    :raises UnsupportedRegimeError: If the regime has no expansion or none validates
    """
    _check_args(q, side)
    model = as_model(p).side(side)
    if not isinstance(model, ThetaProcess) or model.n_poles is not None:
        raise UnsupportedRegimeError("asymptotic tails exist only for theta families with infinitely many poles")
    family = model.family
    regime = expansion_regime(family.chi, family.sigma)
    order, log_factor = EXPANSION_ORDERS[(family.chi, regime)]
    found: Dict[int, Tuple[int, float, float]] = {}

    def error(tail: AsymptoticTail, n: int) -> float:
        if n not in found:
            result = solve_interval(model, q, n)
            assert result is not None
            found[n] = result
        return _offset_error(model, tail, n, found[n])

    # Whether far roots hug the pole below them or the one above
    far_root = solve_interval(model, q, SIDE_TEST_INTERVAL)
    assert far_root is not None
    above = far_root[0] == SIDE_TEST_INTERVAL - 1

    for name in TEMPLATE_NAMES:
        params = _template_params(family, name, q)
        tail = AsymptoticTail(chi=family.chi, regime=regime, template=name, params=params, above=above,
                              first_m=family.kernel.first_m, pole_alpha=family.alpha1, pole_beta=family.beta1,
                              validated_from=0, order=order, log_factor=log_factor)
        try:
            tail.root(VALIDATION_START)
        except UnsupportedRegimeError:
            continue
        n = VALIDATION_START
        while n <= VALIDATION_LIMIT:
            if all(error(tail, k) <= VALIDATION_TOL * model.pole(k) for k in (n, 2 * n)):
                if name != TEMPLATE_NAMES[0]:
                    console.print(f"[yellow]⚠ Asymptotic template '{name}' used for side {side}[/yellow]")
                return replace(tail, validated_from=n)
            n *= 2
    raise UnsupportedRegimeError(
        f"no expansion template for chi = {family.chi} ({regime}) matched refined roots up to n = {VALIDATION_LIMIT}")


def _offset_error(model: LevyModel, tail: AsymptoticTail, n: int, found: Tuple[int, float, float]) -> float:
    anchor, offset, _ = found
    target = tail.anchor_index(n)
    exact = offset + (model.pole(anchor) - model.pole(target)) if anchor != target else offset
    return abs(exact - tail.anchored_offset(n))


def asymptotic_error(p: ModelLike, q: float, side: str, tail: AsymptoticTail, n: int) -> float:
    """
    |zeta_n (refined) - zeta_n (expansion)|, measured through offsets from the anchor
    pole so that errors far below the float spacing of zeta_n stay visible.
    """
    _check_args(q, side)
    model = as_model(p).side(side)
    result = solve_interval(model, q, n)
    if result is None:
        raise DomainError(f"no root with index {n}")
    return _offset_error(model, tail, n, result)


def asymptotic_root(p: ModelLike, q: float, side: str, n: int) -> float:
    """
    Large-n expansion of zeta_n for the requested side.

    :raises UnsupportedRegimeError: If no expansion applies
    """
    return build_asymptotic_tail(p, q, side).root(n)


def tail_sums(tail: AsymptoticTail, n_stored: int, horizon: int = TAIL_HORIZON) -> TailSums:
    """
    Sums over indices n_stored < n <= horizon from the expansion, with the remainder
    beyond the horizon bounded by 1/rho_horizon (interlacing).
    """
    n = np.arange(n_stored + 1, horizon + 1, dtype=float)
    zeta = tail.roots(n)
    rho = tail.poles(n)
    inv_zeta, inv_rho = 1.0 / zeta, 1.0 / rho
    first = math.fsum(inv_zeta - inv_rho)
    second = math.fsum(inv_zeta ** 2 - inv_rho ** 2)
    cubic = math.fsum(inv_zeta ** 3 + inv_rho ** 3) + 2.0 / (tail.pole_beta * horizon) ** 3
    # Roots above their poles make prod zeta/rho diverge to 0
    log_ratio = -math.inf if tail.above else math.fsum(np.log(zeta / rho))
    return TailSums(first=first, second=second, log_ratio=log_ratio, first_bound=float(inv_rho[-1]), cubic=cubic)


def _with_tail(rs: RootSet, tail: Optional[AsymptoticTail], sums: TailSums, radius: float) -> RootSet:
    return RootSet(q=rs.q, side=rs.side, zeros=rs.zeros, anchors=rs.anchors, offsets=rs.offsets,
                   poles=rs.poles, residuals=rs.residuals, tail=tail, complete=rs.complete,
                   tail_sums=sums, radius=radius, sources=rs.sources)


def roots_to_accuracy(p: ModelLike, q: float, side: str, product_tol: float, radius: float = 10.0) -> RootSet:
    """
    Refine enough roots that the neglected product tail changes Wiener-Hopf factors at
    |z| <= radius by a relative amount below product_tol.

    With a validated asymptotic tail the first- and second-order tail sums are added
    back and only the third-order remainder counts; without one the whole first-order
    sum, bounded by 1/rho_N, counts and many more roots are needed.

    :param p: Family or model
    :type p: ModelLike
    :param q: Killing rate
    :type q: float
    :param side: "pos" or "neg"
    :type side: str
    :param product_tol: Relative accuracy in (0, 1)
    :type product_tol: float
    :param radius: Largest |z| the factors will be evaluated at
    :type radius: float
    :return: Root set with tail sums attached
    :rtype: RootSet
    """
    _check_args(q, side)
    if not 0 < product_tol < 1:
        raise DomainError(f"product_tol must lie in (0, 1), got {product_tol}")
    model = as_model(p).side(side)
    if model.n_poles is not None:
        rs = bracket_and_refine(model, q, "pos", model.n_poles + 1)
        return _with_tail(_as_side(rs, side), None, TailSums(), radius)

    try:
        tail: Optional[AsymptoticTail] = build_asymptotic_tail(model, q, "pos")
    except UnsupportedRegimeError as e:
        console.print(f"[yellow]⚠ {e}; refining roots exactly until the tail bound is met (slow)[/yellow]")
        tail = None

    n_stored = LADDER_START
    while True:
        if tail is not None:
            if n_stored >= tail.validated_from:
                sums = tail_sums(tail, n_stored)
                if sums.factor_bound(radius, tail.root(n_stored + 1)) < product_tol:
                    break
        else:
            rho_n = model.pole(n_stored)
            if radius / rho_n < product_tol:
                break
        if n_stored >= LADDER_LIMIT:
            console.print(f"[yellow]⚠ Root ladder capped at {LADDER_LIMIT}; tail bound not met[/yellow]")
            break
        n_stored *= 2

    rs = _as_side(bracket_and_refine(model, q, "pos", n_stored), side)
    if tail is not None:
        sums = tail_sums(tail, n_stored)
    else:
        # 0 < sum_{n>N} (1/zeta_n - 1/rho_n) < 1/rho_N by interlacing
        bound = 0.5 / model.pole(n_stored)
        sums = TailSums(first=bound, first_bound=bound, log_ratio=-math.inf if _regular_upward(model) else 0.0)
    return _with_tail(rs, tail, sums, radius)


def _regular_upward(model: LevyModel) -> bool:
    """
    Whether the path enters (0, inf) immediately, so that the supremum has no atom at zero.

    Diffusion or jumps of unbounded variation (chi >= 2) always do. Otherwise the linear
    drift decides; with zero drift only the compound Poisson family (chi = 1/2) keeps an atom.
    """
    if model.sigma > 0:
        return True
    if not isinstance(model, ThetaProcess):
        return False
    family = model.family
    if family.chi >= 2.0:
        return True
    assert family.rho_drift is not None
    if family.rho_drift != 0:
        return family.rho_drift > 0
    return family.chi > 0.5


def _as_side(rs: RootSet, side: str) -> RootSet:
    return RootSet(q=rs.q, side=side, zeros=rs.zeros, anchors=rs.anchors, offsets=rs.offsets, poles=rs.poles,
                   residuals=rs.residuals, tail=rs.tail, complete=rs.complete, tail_sums=rs.tail_sums,
                   radius=rs.radius, sources=rs.sources)


def roots_to_csv(rs: RootSet, out: TextIO, extra: int = 0) -> None:
    """
    Write n, rho_n, zeta_n, residual, source with 17 significant digits.

    :param rs: Root set
    :type rs: RootSet
    :param out: Text stream
    :type out: TextIO
    :param extra: Number of asymptotic rows to append after the refined ones
    :type extra: int
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "rho_n", "zeta_n", "residual", "source"])
    for n in range(1, rs.n_exact + 1):
        rho = f"{rs.poles[n - 1]:.17g}" if n <= rs.poles.size else "inf"
        writer.writerow([n, rho, f"{rs.zeros[n - 1]:.17g}", f"{rs.residuals[n - 1]:.17g}", "exact"])
    if extra > 0 and rs.tail is not None:
        n = np.arange(rs.n_exact + 1, rs.n_exact + extra + 1)
        for index, rho, zeta in zip(n, rs.tail.poles(n), rs.tail.roots(n)):
            writer.writerow([int(index), f"{rho:.17g}", f"{zeta:.17g}", "", "asymptotic"])
