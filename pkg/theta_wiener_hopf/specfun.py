"""
Special functions behind the theta-family Levy densities and Laplace exponents.

Theta-type series, complex digamma, an overflow-free hyperbolic cotangent and the
branch-even digamma combination psi(i*sqrt(w)) + psi(-i*sqrt(w)). All functions are
pure; accuracies are explicit arguments with defaults.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from theta_wiener_hopf.errors import AccuracyError, DomainError, SingularityError

EULER_GAMMA = 0.57721566490153286061
ZETA3 = 1.2020569031595942854
ZETA5 = 1.0369277551433699263

# Orders admitted by the theta families (k = chi - 1/2)
THETA_ORDERS = (0.0, 0.5, 1.0, 1.5, 2.0)

# Re(z) threshold above which the asymptotic digamma series is used
DIGAMMA_SHIFT = 10.0

# -B_{2j} / (2j) for j = 1..7, coefficients of z^{-2j} in the digamma expansion
_DIGAMMA_ASYMPTOTIC = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)

POLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SeriesAccuracy:
    """
    Truncation control for slowly converging series.

    :param abs_tol: Absolute truncation tolerance
    :type abs_tol: float
    :param max_terms: Hard cap on the number of summed terms
    :type max_terms: int
    """

    abs_tol: float = 1e-14
    max_terms: int = 10 ** 6

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be at least 1, got {self.max_terms}")


def _theta_tail_bound(n_terms: int, x: float, k: float) -> float:
    """
    Bound on 2 * sum_{n > N} n^{2k} exp(-n^2 x).

    Uses n^2 - N^2 >= 2Nj and (1 + j/N)^{2k} <= exp(2kj/N) for n = N + j, which turns the
    tail into a geometric series.
    """
    rate = 2.0 * n_terms * x - 2.0 * k / n_terms
    if rate <= 0.0:
        return math.inf
    log_bound = math.log(2.0) + 2.0 * k * math.log(n_terms) - n_terms * n_terms * x - math.log(math.expm1(rate))
    return math.exp(log_bound) if log_bound < 700.0 else math.inf


def theta_terms_needed(x: float, k: float, acc: SeriesAccuracy) -> int:
    """
    Number of terms of the direct theta series needed for the absolute tolerance.

    The first guess solves N = sqrt((ln(1/tol) + 2k ln N) / x) by fixed-point iteration,
    then N is grown until the rigorous tail bound is below tolerance.

    :raises AccuracyError: If more than acc.max_terms terms would be needed
    """
    log_inv_tol = math.log(1.0 / acc.abs_tol)
    n_terms = max(1, math.ceil(math.sqrt(log_inv_tol / x)))
    for _ in range(50):
        guess = max(1, math.ceil(math.sqrt((log_inv_tol + 2.0 * k * math.log(n_terms)) / x)))
        if guess == n_terms:
            break
        n_terms = guess
    while _theta_tail_bound(n_terms, x, k) > acc.abs_tol:
        if n_terms > acc.max_terms:
            raise AccuracyError(
                f"theta series at x={x:g}, k={k:g} needs more than {acc.max_terms} terms",
                achieved=_theta_tail_bound(acc.max_terms, x, k))
        n_terms = int(n_terms * 1.1) + 1
    if n_terms > acc.max_terms:
        raise AccuracyError(
            f"theta series at x={x:g}, k={k:g} needs {n_terms} terms (cap {acc.max_terms})",
            achieved=_theta_tail_bound(acc.max_terms, x, k))
    return n_terms


def theta0_modular(x: float, acc: SeriesAccuracy = SeriesAccuracy()) -> float:
    """
    Theta_0(x) = theta_3(0, e^{-x}) through the Jacobi transformation
    sqrt(pi/x) * theta_3(0, e^{-pi^2/x}).

    :param x: Positive argument
    :type x: float
    :param acc: Truncation control
    :type acc: SeriesAccuracy
    :return: Theta_0(x)
    :rtype: float
    """
    if not x > 0:
        raise DomainError(f"theta series needs x > 0, got {x}")
    dual = math.pi * math.pi / x
    prefactor = math.sqrt(math.pi / x)
    n_terms = theta_terms_needed(dual, 0.0, SeriesAccuracy(acc.abs_tol / prefactor, acc.max_terms))
    n = np.arange(1, n_terms + 1, dtype=float)
    return prefactor * (1.0 + 2.0 * math.fsum(np.exp(-n * n * dual)))


def theta_k_direct(x: float, k: float, acc: SeriesAccuracy = SeriesAccuracy()) -> float:
    """Direct summation of delta_{k,0} + 2 * sum n^{2k} exp(-n^2 x)."""
    if not x > 0:
        raise DomainError(f"theta series needs x > 0, got {x}")
    n_terms = theta_terms_needed(x, k, acc)
    n = np.arange(1, n_terms + 1, dtype=float)
    terms = np.exp(2.0 * k * np.log(n) - n * n * x)
    return (1.0 if k == 0 else 0.0) + 2.0 * math.fsum(terms)


def theta_k(x: float, k: float, acc: SeriesAccuracy = SeriesAccuracy()) -> float:
    """
    Theta-type series Theta_k(x) = delta_{k,0} + 2 * sum_{n>=1} n^{2k} exp(-n^2 x).

    For k = 0 and x < 1 the modular transformation is used; everything else is summed
    directly with an adaptive term count.

    :param x: Positive argument
    :type x: float
    :param k: Order, one of 0, 1/2, 1, 3/2, 2
    :type k: float
    :param acc: Truncation control
    :type acc: SeriesAccuracy
    :return: Theta_k(x)
    :rtype: float
    :raises DomainError: If x <= 0 or k is not an admitted order
    :raises AccuracyError: If the term cap is exceeded
    """
    if k not in THETA_ORDERS:
        raise DomainError(f"theta order k must be one of {THETA_ORDERS}, got {k}")
    if not x > 0:
        raise DomainError(f"theta series needs x > 0, got {x}")
    if k == 0 and x < 1.0:
        return theta0_modular(x, acc)
    return theta_k_direct(x, k, acc)


def digamma(z: complex) -> complex:
    """
    Principal digamma function psi(z) = Gamma'(z)/Gamma(z) for complex z.

    Reflection for Re(z) < 0, the recurrence psi(z) = psi(z+1) - 1/z up to
    Re(z) >= 10, then the asymptotic Stirling-type expansion.

    :param z: Complex argument, not a nonpositive integer
    :type z: complex
    :return: psi(z)
    :rtype: complex
    :raises DomainError: At the poles z = 0, -1, -2, ...
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"digamma has a pole at z = {int(z.real)}")
    if z.real < 0.0:
        # psi(z) = psi(1 - z) - pi * cot(pi z)
        return digamma(1.0 - z) - math.pi / cmath.tan(math.pi * z)
    shift = 0j
    while z.real < DIGAMMA_SHIFT:
        shift -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0j
    for coefficient in reversed(_DIGAMMA_ASYMPTOTIC):
        series = (series + coefficient) * inv2
    return shift + cmath.log(z) - 0.5 / z + series


def coth_stable(w: complex) -> complex:
    """
    Hyperbolic cotangent evaluated as 1 + 2/(e^{2w} - 1) without overflow.

    :param w: Complex argument away from the poles i*pi*n
    :type w: complex
    :return: coth(w)
    :rtype: complex
    :raises SingularityError: Within POLE_TOLERANCE of a pole i*pi*n
    """
    w = complex(w)
    n = round(w.imag / math.pi)
    if abs(w - 1j * math.pi * n) < POLE_TOLERANCE:
        raise SingularityError(f"coth has a pole at i*pi*{n}", pole_index=n)
    if w.real < 0.0:
        return -coth_stable(-w)
    if 2.0 * w.real > 700.0:
        return 1.0 + 0j
    if abs(w) < 1e-3:
        w2 = w * w
        return 1.0 / w + w * (1.0 / 3.0 - w2 * (1.0 / 45.0 - w2 * 2.0 / 945.0))
    return 1.0 + 2.0 / (cmath.exp(2.0 * w) - 1.0)


def even_digamma_pair(w: complex) -> complex:
    """
    psi(i*sqrt(w)) + psi(-i*sqrt(w)) as a single branch-free primitive.

    The combination is even in sqrt(w), so the principal branch is used internally.
    The point w = 0 is a removable singularity and is evaluated by its Taylor series.

    :param w: Complex argument, away from -n^2 for n >= 1
    :type w: complex
    :return: The digamma pair
    :rtype: complex
    :raises SingularityError: Near a pole w = -n^2
    """
    w = complex(w)
    if abs(w) < 1e-8:
        return -2.0 * EULER_GAMMA + 2.0 * ZETA3 * w - 2.0 * ZETA5 * w * w
    if w.real < 0.0:
        n = round(math.sqrt(-w.real))
        if n >= 1 and abs(w + n * n) < POLE_TOLERANCE * n * n:
            raise SingularityError(f"digamma pair has a pole at w = -{n}^2", pole_index=n)
    root = cmath.sqrt(w)
    return digamma(1j * root) + digamma(-1j * root)


def real_digamma(x: float) -> float:
    """Digamma on the positive real axis."""
    return digamma(complex(x)).real
