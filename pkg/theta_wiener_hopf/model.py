#!/usr/bin/env python3
"""
Process definitions: exponential-series Levy measures and the five theta families.

A theta family with singularity order chi has the Levy density

    pi(x) = 1(x>0) c1 b1 exp(-a1 x) Theta_k(b1 x) + 1(x<0) c2 b2 exp(a2 x) Theta_k(-b2 x),

k = chi - 1/2, which expands into a series of exponentials with poles
rho_m = alpha + beta * m^2. Its Laplace exponent has a closed form built from one
kernel per chi (coth or digamma based), see ThetaKernel.
"""

import cmath
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from rich.console import Console
from scipy import integrate

from theta_wiener_hopf.errors import CalibrationError, DomainError, ParameterValidationError, SingularityError
from theta_wiener_hopf.model_base import LevyModel
from theta_wiener_hopf.specfun import coth_stable, even_digamma_pair, real_digamma, theta_k

console = Console(stderr=True)

CHI_GRID = (0.5, 1.0, 1.5, 2.0, 2.5)
SCHEMA_VERSION = 1

# Relative distance to a pole below which the closed form refuses to evaluate
POLE_GUARD = 1e-10

FAMILY_FIELDS = ("chi", "sigma", "mu", "c1", "c2", "alpha1", "alpha2", "beta1", "beta2")


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

class ThetaKernel(ABC):
    """
    One side of the closed-form Laplace exponent, as a function of w = (alpha - z)/beta.

    The jump part of phi is c1 * kappa(w1) + c2 * kappa(w2) up to an affine function of z.
    Every kernel is even in sqrt(w), so the principal branch can be used.
    """

    # Sign of gamma in the Laplace exponent is -gamma_sign
    gamma_sign: float = 1.0
    # Integer m of the first pole alpha + beta m^2
    first_m: int = 1

    @abstractmethod
    def evaluate(self, w: complex) -> complex:
        """kappa(w) for a complex w off the pole set."""

    def near_pole(self, m: int, dw: float) -> float:
        """
        kappa at the real point w = -m^2 + dw, with the singular factor computed from dw.

        Points with sqrt(-w) below m - 1/2 (including w >= 0) are at least m - 1/4 away
        from the pole in w and go through evaluate().

        :param m: Pole integer
        :type m: int
        :param dw: Offset in w (negative above the pole in z)
        :type dw: float
        """
        if m * m - dw <= max(m - 0.5, 0.0) ** 2:
            return self.evaluate(complex(-m * m + dw)).real
        y = math.sqrt(m * m - dw)
        return self._singular(y, -dw / (y + m))

    @abstractmethod
    def _singular(self, y: float, eps: float) -> float:
        """kappa at w = -y^2, where eps = y - m is small."""

    @staticmethod
    def _cot_pi(eps: float) -> float:
        return 1.0 / math.tan(math.pi * eps)


class HalfKernel(ThetaKernel):
    """chi = 1/2: pi coth(pi sqrt(w)) / sqrt(w)."""

    gamma_sign = 1.0
    first_m = 0

    def evaluate(self, w: complex) -> complex:
        w = complex(w)
        if abs(w) < 1e-7:
            return 1.0 / w + math.pi ** 2 / 3.0 - math.pi ** 4 * w / 45.0
        root = cmath.sqrt(w)
        return math.pi * coth_stable(math.pi * root) / root

    def _singular(self, y: float, eps: float) -> float:
        return -math.pi * self._cot_pi(eps) / y


class OneKernel(ThetaKernel):
    """chi = 1: -(psi(i sqrt(w)) + psi(-i sqrt(w)))."""

    gamma_sign = -1.0

    def evaluate(self, w: complex) -> complex:
        return -even_digamma_pair(w)

    def _singular(self, y: float, eps: float) -> float:
        # psi(-y) = psi(1 + y) + pi cot(pi y), and cot(pi y) = cot(pi eps)
        return -(real_digamma(y) + real_digamma(1.0 + y) + math.pi * self._cot_pi(eps))


class ThreeHalvesKernel(ThetaKernel):
    """chi = 3/2: -pi sqrt(w) coth(pi sqrt(w))."""

    gamma_sign = -1.0

    def evaluate(self, w: complex) -> complex:
        w = complex(w)
        if abs(w) < 1e-7:
            return -(1.0 + math.pi ** 2 * w / 3.0 - math.pi ** 4 * w * w / 45.0)
        root = cmath.sqrt(w)
        return -math.pi * root * coth_stable(math.pi * root)

    def _singular(self, y: float, eps: float) -> float:
        return -math.pi * y * self._cot_pi(eps)


class TwoKernel(ThetaKernel):
    """chi = 2: w (psi(i sqrt(w)) + psi(-i sqrt(w)))."""

    gamma_sign = 1.0

    def evaluate(self, w: complex) -> complex:
        return complex(w) * even_digamma_pair(w)

    def _singular(self, y: float, eps: float) -> float:
        return -y * y * (real_digamma(y) + real_digamma(1.0 + y) + math.pi * self._cot_pi(eps))


class FiveHalvesKernel(ThetaKernel):
    """chi = 5/2: pi w^{3/2} coth(pi sqrt(w))."""

    gamma_sign = 1.0

    def evaluate(self, w: complex) -> complex:
        w = complex(w)
        if abs(w) < 1e-7:
            return w * (1.0 + math.pi ** 2 * w / 3.0)
        root = cmath.sqrt(w)
        return math.pi * w * root * coth_stable(math.pi * root)

    def _singular(self, y: float, eps: float) -> float:
        return -math.pi * y ** 3 * self._cot_pi(eps)


KERNELS: Dict[float, ThetaKernel] = {
    0.5: HalfKernel(),
    1.0: OneKernel(),
    1.5: ThreeHalvesKernel(),
    2.0: TwoKernel(),
    2.5: FiveHalvesKernel(),
}


# ---------------------------------------------------------------------------
# Parameter bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaFamily:
    """
    Parameters of a theta-family Levy process.

    :param chi: Singularity order, one of 1/2, 1, 3/2, 2, 5/2
    :type chi: float
    :param sigma: Gaussian coefficient
    :type sigma: float
    :param mu: Linear drift (chi < 2, cutoff h = 0) or mean E[X_1] (chi >= 2, cutoff h = 1)
    :type mu: float
    :param c1: Positive-jump intensity (0 admitted)
    :type c1: float
    :param c2: Negative-jump intensity (0 admitted)
    :type c2: float
    :param alpha1: Positive-jump exponential damping
    :type alpha1: float
    :param alpha2: Negative-jump exponential damping
    :type alpha2: float
    :param beta1: Positive-jump theta scale
    :type beta1: float
    :param beta2: Negative-jump theta scale
    :type beta2: float
    :param gamma: Normalizing constant enforcing phi(0) = 0, set by calibration
    :type gamma: Optional[float]
    :param rho_drift: Coefficient of z in the closed form, set by calibration
    :type rho_drift: Optional[float]
    """

    chi: float
    sigma: float
    mu: float
    c1: float
    c2: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    gamma: Optional[float] = None
    rho_drift: Optional[float] = None

    def __post_init__(self) -> None:
        if self.chi not in CHI_GRID:
            raise ParameterValidationError("chi", f"must be one of {CHI_GRID}, got {self.chi}")
        for name in FAMILY_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise ParameterValidationError(name, f"must be a finite number, got {value!r}")
        if self.sigma < 0:
            raise ParameterValidationError("sigma", f"must be nonnegative, got {self.sigma}")
        for name in ("c1", "c2"):
            if getattr(self, name) < 0:
                raise ParameterValidationError(name, f"must be nonnegative, got {getattr(self, name)}")
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            if getattr(self, name) <= 0:
                raise ParameterValidationError(name, f"must be positive, got {getattr(self, name)}")

    @property
    def k(self) -> float:
        """Theta order k = chi - 1/2."""
        return self.chi - 0.5

    @property
    def kernel(self) -> ThetaKernel:
        return KERNELS[self.chi]

    @property
    def compensated(self) -> bool:
        """True when the cutoff h = 1 convention applies (chi >= 2)."""
        return self.chi >= 2.0

    @property
    def calibrated(self) -> bool:
        return self.gamma is not None and self.rho_drift is not None

    def side_params(self, side: int) -> Tuple[float, float, float]:
        """(c, alpha, beta) of side 1 (positive jumps) or 2 (negative jumps)."""
        if side == 1:
            return self.c1, self.alpha1, self.beta1
        return self.c2, self.alpha2, self.beta2

    def pole_integer(self, n: int) -> int:
        """Integer m with rho_n = alpha + beta m^2 for the 1-based pole index n."""
        return n - 1 + self.kernel.first_m

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        data.update({name: getattr(self, name) for name in FAMILY_FIELDS})
        return data


@dataclass(frozen=True)
class ExpSeriesMeasure:
    """
    Levy density sum a_n rho_n exp(-rho_n x) on x > 0 and sum a^_n rho^_n exp(rho^_n x) on x < 0.

    The coefficient generators are vectorized: they take an integer array of 1-based
    indices and return (a, rho) arrays.

    :param coeff_pos_fn: Generator of (a_n, rho_n)
    :type coeff_pos_fn: Callable
    :param coeff_neg_fn: Generator of (a^_n, rho^_n)
    :type coeff_neg_fn: Callable
    :param length: Number of nonzero terms on each side, None for an infinite side
    :type length: Tuple[Optional[int], Optional[int]]
    """

    coeff_pos_fn: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
    coeff_neg_fn: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
    length: Tuple[Optional[int], Optional[int]] = (None, None)

    def side_length(self, side: str) -> Optional[int]:
        return self.length[0 if side == "pos" else 1]

    def coeff_pos(self, n: int) -> Tuple[float, float]:
        a, rho = self.coeff_pos_fn(np.array([n]))
        return float(a[0]), float(rho[0])

    def coeff_neg(self, n: int) -> Tuple[float, float]:
        a, rho = self.coeff_neg_fn(np.array([n]))
        return float(a[0]), float(rho[0])

    def arrays(self, side: str, count: int, start: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """
        Coefficients for indices start .. start + count - 1 (clipped to a finite length).

        :param side: "pos" or "neg"
        :type side: str
        """
        stop = start + count
        length = self.side_length(side)
        if length is not None:
            stop = min(stop, length + 1)
        if stop <= start:
            return np.zeros(0), np.zeros(0)
        n = np.arange(start, stop)
        return (self.coeff_pos_fn if side == "pos" else self.coeff_neg_fn)(n)

    def moment_sum(self, side: str, power: float, start: int = 1, count: int = 10 ** 6) -> float:
        """
        sum_{n >= start} a_n rho_n^{-power}, summed over count terms plus a power-law
        estimate of the remainder for infinite series.
        """
        a, rho = self.arrays(side, count, start)
        if a.size == 0:
            return 0.0
        terms = a * rho ** (-power)
        total = math.fsum(terms)
        if self.side_length(side) is None and terms.size >= 2 and terms[-1] > 0 and terms[-2] > 0:
            last = start + terms.size - 1
            slope = math.log(terms[-1] / terms[-2]) / math.log(last / (last - 1))
            if slope < -1.0:
                total += terms[-1] * last / (-slope - 1.0)
        return total

    @staticmethod
    def finite(a: List[float], rho: List[float], a_hat: List[float], rho_hat: List[float]) -> "ExpSeriesMeasure":
        """Measure with finitely many exponentials per side."""
        pos = (np.asarray(a, dtype=float), np.asarray(rho, dtype=float))
        neg = (np.asarray(a_hat, dtype=float), np.asarray(rho_hat, dtype=float))
        return ExpSeriesMeasure(
            coeff_pos_fn=lambda n: (pos[0][n - 1], pos[1][n - 1]),
            coeff_neg_fn=lambda n: (neg[0][n - 1], neg[1][n - 1]),
            length=(len(pos[0]), len(neg[0])))


@dataclass(frozen=True)
class SeriesValue:
    """Truncated series value with the bound on what was left out."""

    value: complex
    tail_bound: float


@dataclass(frozen=True)
class EvalPoint:
    """
    Point at which an exponent is requested.

    :param z: Complex argument
    :type z: complex
    :param representation: "laplace" for phi(z) or "characteristic" for Psi(z) = -phi(iz)
    :type representation: str
    """

    z: complex
    representation: str = "laplace"

    def __post_init__(self) -> None:
        if self.representation not in ("laplace", "characteristic"):
            raise DomainError(f"unknown exponent representation {self.representation!r}")


# ---------------------------------------------------------------------------
# Operations on theta families
# ---------------------------------------------------------------------------

def levy_density(p: ThetaFamily, x: float) -> float:
    """
    Levy density pi_chi(x).

    :param p: Family parameters
    :type p: ThetaFamily
    :param x: Nonzero jump size
    :type x: float
    :return: Density value
    :rtype: float
    :raises DomainError: At x = 0
    """
    if x == 0:
        raise DomainError("Levy density is singular at x = 0")
    c, alpha, beta = p.side_params(1 if x > 0 else 2)
    if c == 0:
        return 0.0
    ax = abs(x)
    return c * beta * math.exp(-alpha * ax) * theta_k(ax * beta, p.k)


def _amplitude(p: ThetaFamily, side: int, m: np.ndarray) -> np.ndarray:
    """A(m) = a * rho for the exponential with pole alpha + beta m^2."""
    c, _, beta = p.side_params(side)
    m = np.asarray(m, dtype=float)
    amplitude = 2.0 * c * beta * m ** (2.0 * p.k)
    if p.k == 0:
        amplitude = np.where(m == 0, c * beta, amplitude)
    return amplitude


def series_coefficients(p: ThetaFamily) -> ExpSeriesMeasure:
    """
    Exponential-series form of the family: rho_n = alpha + beta m^2 with m = n - 1 for
    chi = 1/2 and m = n otherwise; a_n rho_n = 2 c beta m^{2k} (c beta for the chi = 1/2 atom).
    """
    first_m = p.kernel.first_m

    def generator(side: int) -> Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]:
        c, alpha, beta = p.side_params(side)

        def coefficients(n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            m = np.asarray(n, dtype=float) - 1 + first_m
            rho = alpha + beta * m * m
            return _amplitude(p, side, m) / rho, rho
        return coefficients

    # A side with zero intensity has no terms at all
    return ExpSeriesMeasure(generator(1), generator(2), (0 if p.c1 == 0 else None, 0 if p.c2 == 0 else None))


def _jump_raw(p: ThetaFamily, z: complex) -> complex:
    """c1 kappa((a1 - z)/b1) + c2 kappa((a2 + z)/b2), the unnormalized jump part."""
    kernel = p.kernel
    total = 0j
    if p.c1 > 0:
        total += p.c1 * kernel.evaluate((p.alpha1 - z) / p.beta1)
    if p.c2 > 0:
        total += p.c2 * kernel.evaluate((p.alpha2 + z) / p.beta2)
    return total


def _check_poles(p: ThetaFamily, z: complex) -> None:
    first_m = p.kernel.first_m
    for side, sign in ((1, 1.0), (2, -1.0)):
        c, alpha, beta = p.side_params(side)
        if c == 0:
            continue
        u = sign * z.real
        m = max(first_m, round(math.sqrt(max(0.0, (u - alpha) / beta))))
        pole = alpha + beta * m * m
        if abs(sign * z - pole) < POLE_GUARD * pole:
            label = "positive" if side == 1 else "negative"
            index = m - first_m + 1
            raise SingularityError(f"z = {z} is within {POLE_GUARD:g} (relative) of {label} pole {index}",
                                   pole_index=index if side == 1 else -index)


def laplace_exponent(p: ThetaFamily, z: complex) -> complex:
    """
    Closed-form Laplace exponent phi(z) = -Psi(-iz).

    :param p: Calibrated family
    :type p: ThetaFamily
    :param z: Complex point away from the real poles
    :type z: complex
    :return: phi(z)
    :rtype: complex
    :raises SingularityError: Within relative distance 1e-10 of a pole
    """
    if not p.calibrated:
        p = calibrate_gamma_and_drift(p)
    z = complex(z)
    _check_poles(p, z)
    assert p.gamma is not None and p.rho_drift is not None
    return (0.5 * p.sigma ** 2 * z * z + p.rho_drift * z + _jump_raw(p, z)
            - p.kernel.gamma_sign * p.gamma)


def evaluate_exponent(p: ThetaFamily, point: EvalPoint) -> complex:
    """phi(z) or the characteristic exponent Psi(z) = -phi(iz), as requested by the point."""
    if point.representation == "characteristic":
        return -laplace_exponent(p, 1j * complex(point.z))
    return laplace_exponent(p, point.z)


def laplace_exponent_series(p: ThetaFamily, z: complex, n_terms: int) -> SeriesValue:
    """
    Partial-fraction form of phi with n_terms exponentials per side and a continuum
    estimate of the omitted tail.

    Under cutoff h = 0 (chi < 2) the terms are a z/(rho - z) and -a^ z/(rho^ + z);
    under h = 1 they are z^2 a/(rho(rho - z)) and z^2 a^/(rho^(rho^ + z)).

    :param p: Family parameters
    :type p: ThetaFamily
    :param z: Complex point away from the first n_terms poles
    :type z: complex
    :param n_terms: Number of exponentials per side
    :type n_terms: int
    :return: Value and bound on the tail estimate's error
    :rtype: SeriesValue
    """
    z = complex(z)
    base = 0.5 * p.sigma ** 2 * z * z + p.mu * z
    first_m = p.kernel.first_m
    value = base
    bound = 0.0
    for side, sign in ((1, 1.0), (2, -1.0)):
        c, alpha, beta = p.side_params(side)
        if c == 0:
            continue
        u = sign * z

        def term(m: Any) -> Any:
            rho = alpha + beta * m * m
            amplitude = _amplitude(p, side, m)
            if p.compensated:
                return u * u * amplitude / (rho * rho * (rho - u))
            return u * amplitude / (rho * (rho - u))

        if n_terms > 0:
            m = np.arange(first_m, first_m + n_terms, dtype=float)
            terms = term(m)
            value += complex(math.fsum(terms.real), math.fsum(terms.imag))
        start = first_m + n_terms - 0.5
        if alpha + beta * max(start, 0.0) ** 2 < 2.0 * abs(u):
            bound = math.inf
            continue

        def continuum(x: float) -> complex:
            return complex(term(np.array([x]))[0])

        lower = max(start, 0.0)
        re_part, re_err = integrate.quad(lambda x: continuum(x).real, lower, math.inf, limit=200)
        im_part, im_err = integrate.quad(lambda x: continuum(x).imag, lower, math.inf, limit=200)
        value += complex(re_part, im_part)
        if n_terms == 0:
            bound += abs(complex(re_part, im_part))
        else:
            step = 1e-3 * lower
            slope = (continuum(lower + step) - continuum(lower - step)) / (2.0 * step)
            bound += abs(slope) / 12.0
        bound += 10.0 * (re_err + im_err)
    return SeriesValue(value=value, tail_bound=bound)


def _richardson_derivative(func: Callable[[float], float], h: float, target: float = 1e-10) -> float:
    """Central-difference derivative at 0 with one Richardson step, refined until stable."""
    def central(step: float) -> float:
        return (func(step) - func(-step)) / (2.0 * step)

    previous = None
    for _ in range(12):
        estimate = (4.0 * central(h / 2.0) - central(h)) / 3.0
        if previous is not None and abs(estimate - previous) <= target * (1.0 + abs(estimate)):
            return estimate
        previous = estimate
        h /= 2.0
    raise CalibrationError(f"derivative extrapolation did not converge (last estimate {previous})")


def _first_pole(p: ThetaFamily, side: int) -> float:
    _, alpha, beta = p.side_params(side)
    m = p.kernel.first_m
    return alpha + beta * m * m


def calibrate_gamma_and_drift(p: ThetaFamily) -> ThetaFamily:
    """
    Fix gamma by phi(0) = 0 and the linear coefficient rho_drift by the cutoff convention:
    rho_drift = mu for chi < 2, phi'(0) = mu for chi >= 2.

    :param p: Raw parameters (derived fields ignored)
    :type p: ThetaFamily
    :return: Calibrated copy
    :rtype: ThetaFamily
    :raises CalibrationError: If the drift derivative does not converge
    """
    gamma = p.kernel.gamma_sign * _jump_raw(p, 0.0).real
    if not p.compensated:
        return replace(p, gamma=gamma, rho_drift=p.mu)
    h = 1e-2 * min(_first_pole(p, 1), _first_pole(p, 2))
    slope = _richardson_derivative(lambda x: _jump_raw(p, x).real, h)
    return replace(p, gamma=gamma, rho_drift=p.mu - slope)


def mirror(p: ThetaFamily) -> ThetaFamily:
    """Family of the negated process -X: sides swapped, drift negated, gamma kept."""
    return replace(
        p, mu=-p.mu, c1=p.c2, c2=p.c1, alpha1=p.alpha2, alpha2=p.alpha1, beta1=p.beta2, beta2=p.beta1,
        rho_drift=None if p.rho_drift is None else -p.rho_drift)


def expected_value(p: ThetaFamily) -> float:
    """E[X_1] = phi'(0)."""
    if p.compensated:
        return p.mu
    if not p.calibrated:
        p = calibrate_gamma_and_drift(p)
    h = 1e-2 * min(_first_pole(p, 1), _first_pole(p, 2))
    return p.mu + _richardson_derivative(lambda x: _jump_raw(p, x).real, h)


def integrability_check(p: ThetaFamily, eps_list: Tuple[float, ...] = (1e-2, 1e-4, 1e-6)) -> Dict[str, Any]:
    """
    Truncated second moments of the Levy measure and the series ceiling 2 sum a_n rho_n^{-2}.

    :return: {"eps": [...], "integrals": [...], "ceiling": float}
    :rtype: Dict[str, Any]
    """
    measure = series_coefficients(p)
    ceiling = 2.0 * (measure.moment_sum("pos", 2.0) + measure.moment_sum("neg", 2.0))
    integrals = []
    for eps in eps_list:
        total = 0.0
        for sign in (1.0, -1.0):
            near, _ = integrate.quad(lambda u: math.exp(3.0 * u) * levy_density(p, sign * math.exp(u)),
                                     math.log(eps), 0.0, limit=200)
            far, _ = integrate.quad(lambda x: x * x * levy_density(p, sign * x), 1.0, math.inf, limit=200)
            total += near + far
        integrals.append(total)
    return {"eps": list(eps_list), "integrals": integrals, "ceiling": ceiling}


# ---------------------------------------------------------------------------
# Engine models
# ---------------------------------------------------------------------------

class ThetaProcess(LevyModel):
    """
    Theta-family model for the root finder and the Wiener-Hopf engine.

    :param family: Family parameters, calibrated on construction if needed
    :type family: ThetaFamily
    """

    def __init__(self, family: ThetaFamily):
        if not family.calibrated:
            family = calibrate_gamma_and_drift(family)
        super().__init__(family.sigma)
        self.family = family

    def laplace_exponent(self, z: complex) -> complex:
        return laplace_exponent(self.family, z)

    @property
    def n_poles(self) -> Optional[int]:
        return 0 if self.family.c1 == 0 else None

    def pole(self, n: int) -> float:
        if n == 0:
            return 0.0
        m = self.family.pole_integer(n)
        return self.family.alpha1 + self.family.beta1 * m * m

    def phi_anchored(self, anchor: int, offset: float) -> float:
        p = self.family
        if anchor == 0:
            return self.laplace_exponent(offset).real
        assert p.gamma is not None and p.rho_drift is not None
        z = self.pole(anchor) + offset
        value = 0.5 * p.sigma ** 2 * z * z + p.rho_drift * z - p.kernel.gamma_sign * p.gamma
        value += p.c1 * p.kernel.near_pole(p.pole_integer(anchor), -offset / p.beta1)
        if p.c2 > 0:
            value += p.c2 * p.kernel.evaluate((p.alpha2 + z) / p.beta2).real
        return value

    def mirror(self) -> "ThetaProcess":
        return ThetaProcess(mirror(self.family))

    def measure(self) -> ExpSeriesMeasure:
        return series_coefficients(self.family)


class SeriesProcess(LevyModel):
    """
    Finite exponential-series model (rational Laplace exponent) in the compensated form
    phi(z) = sigma^2 z^2/2 + mu z + z^2 sum a/(rho(rho - z)) + z^2 sum a^/(rho^(rho^ + z)).

    :param sigma: Gaussian coefficient
    :type sigma: float
    :param mu: Mean E[X_1]
    :type mu: float
    :param a: Positive-side weights
    :type a: List[float]
    :param rho: Positive-side poles, strictly increasing
    :type rho: List[float]
    :param a_hat: Negative-side weights
    :type a_hat: List[float]
    :param rho_hat: Negative-side poles, strictly increasing
    :type rho_hat: List[float]
    """

    def __init__(self, sigma: float, mu: float, a: List[float], rho: List[float],
                 a_hat: List[float], rho_hat: List[float]):
        super().__init__(sigma)
        self.mu = mu
        self.a = np.asarray(a, dtype=float)
        self.rho = np.asarray(rho, dtype=float)
        self.a_hat = np.asarray(a_hat, dtype=float)
        self.rho_hat = np.asarray(rho_hat, dtype=float)
        for name, weights, poles in (("a", self.a, self.rho), ("a_hat", self.a_hat, self.rho_hat)):
            if weights.shape != poles.shape:
                raise ParameterValidationError(name, "weights and poles must have the same length")
            if np.any(weights <= 0) or np.any(poles <= 0):
                raise ParameterValidationError(name, "weights and poles must be positive")
            if np.any(np.diff(poles) <= 0):
                raise ParameterValidationError(name, "poles must be strictly increasing")
        if sigma < 0:
            raise ParameterValidationError("sigma", f"must be nonnegative, got {sigma}")

    @staticmethod
    def _terms(u: complex, weights: np.ndarray, poles: np.ndarray) -> complex:
        return complex(np.sum(u * u * weights / (poles * (poles - u)))) if weights.size else 0j

    def laplace_exponent(self, z: complex) -> complex:
        z = complex(z)
        for index, pole in enumerate(self.rho, start=1):
            if abs(z - pole) < POLE_GUARD * pole:
                raise SingularityError(f"z = {z} is at positive pole {index}", pole_index=index)
        for index, pole in enumerate(self.rho_hat, start=1):
            if abs(z + pole) < POLE_GUARD * pole:
                raise SingularityError(f"z = {z} is at negative pole {index}", pole_index=-index)
        return (0.5 * self.sigma ** 2 * z * z + self.mu * z + self._terms(z, self.a, self.rho)
                + self._terms(-z, self.a_hat, self.rho_hat))

    @property
    def n_poles(self) -> Optional[int]:
        return int(self.rho.size)

    def pole(self, n: int) -> float:
        return 0.0 if n == 0 else float(self.rho[n - 1])

    def phi_anchored(self, anchor: int, offset: float) -> float:
        if anchor == 0:
            return self.laplace_exponent(offset).real
        z = self.pole(anchor) + offset
        mask = np.arange(1, self.rho.size + 1) != anchor
        weight, pole = self.a[anchor - 1], self.rho[anchor - 1]
        singular = -weight * z * z / (pole * offset)
        regular = np.sum(z * z * self.a[mask] / (self.rho[mask] * (self.rho[mask] - z)))
        return float(0.5 * self.sigma ** 2 * z * z + self.mu * z + singular + regular
                     + self._terms(-z, self.a_hat, self.rho_hat).real)

    def mirror(self) -> "SeriesProcess":
        return SeriesProcess(self.sigma, -self.mu, list(self.a_hat), list(self.rho_hat), list(self.a), list(self.rho))

    def measure(self) -> ExpSeriesMeasure:
        return ExpSeriesMeasure.finite(list(self.a), list(self.rho), list(self.a_hat), list(self.rho_hat))

    def to_dict(self) -> Dict[str, Any]:
        return {"schema_version": SCHEMA_VERSION, "kind": "series", "sigma": self.sigma, "mu": self.mu,
                "a": self.a.tolist(), "rho": self.rho.tolist(),
                "a_hat": self.a_hat.tolist(), "rho_hat": self.rho_hat.tolist()}


# ---------------------------------------------------------------------------
# Parameter files
# ---------------------------------------------------------------------------

def family_from_dict(data: Dict[str, Any]) -> ThetaFamily:
    """
    Build a ThetaFamily from parsed JSON.

    :raises ParameterValidationError: Naming the first missing or invalid field
    """
    for name in FAMILY_FIELDS:
        if name not in data:
            raise ParameterValidationError(name, "missing from parameter file")
        if not isinstance(data[name], (int, float)) or isinstance(data[name], bool):
            raise ParameterValidationError(name, f"must be a number, got {data[name]!r}")
    return ThetaFamily(**{name: float(data[name]) for name in FAMILY_FIELDS})


def model_from_dict(data: Dict[str, Any]) -> LevyModel:
    """Theta family (default) or finite exponential series (kind = "series")."""
    if data.get("kind", "theta") == "series":
        for name in ("sigma", "mu", "a", "rho", "a_hat", "rho_hat"):
            if name not in data:
                raise ParameterValidationError(name, "missing from parameter file")
        return SeriesProcess(float(data["sigma"]), float(data["mu"]), data["a"], data["rho"],
                             data["a_hat"], data["rho_hat"])
    return ThetaProcess(family_from_dict(data))


def _read_params(file_path: str) -> Dict[str, Any]:
    try:
        with open(file_path, 'r') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ParameterValidationError("params", f"file not found: {file_path}")
    except json.JSONDecodeError as e:
        raise ParameterValidationError("params", f"invalid JSON in {file_path}: {e}")
    if not isinstance(data, dict):
        raise ParameterValidationError("params", "top level must be a JSON object")
    if data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ParameterValidationError("schema_version", f"expected {SCHEMA_VERSION}, got {data['schema_version']!r}")
    return data


def load_family(file_path: str) -> ThetaFamily:
    """Load a theta-family parameter file (uncalibrated)."""
    data = _read_params(file_path)
    if data.get("kind", "theta") != "theta":
        raise ParameterValidationError("kind", f"expected a theta family, got {data['kind']!r}")
    return family_from_dict(data)


def load_model(file_path: str) -> LevyModel:
    """
    Load and validate a parameter file.

    :param file_path: Path to the JSON parameter file
    :type file_path: str
    :return: Calibrated model
    :rtype: LevyModel
    :raises ParameterValidationError: If the file is missing, malformed or invalid
    """
    model = model_from_dict(_read_params(file_path))
    console.print(f"[cyan]Loaded parameters:[/cyan] {Path(file_path).name}")
    return model
