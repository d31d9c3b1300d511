#!/usr/bin/env python3
"""
Base class for Levy models handled by the Wiener-Hopf engine.

The root finder and the factorization code only talk to a LevyModel: a real
meromorphic Laplace exponent with a known increasing sequence of positive poles.
Concrete models (theta families, finite exponential series) inherit from
LevyModel and implement the evaluation hooks.
"""

from abc import ABC, abstractmethod
from typing import Optional

SIDES = ("pos", "neg")


class LevyModel(ABC):
    """
    Abstract Levy process whose Laplace exponent phi(z) = ln E[exp(z X_1)] is meromorphic
    with real poles rho_1 < rho_2 < ... on the positive axis (and mirrored ones on the
    negative axis, reached through mirror()).

    :param sigma: Gaussian coefficient
    :type sigma: float
    """

    def __init__(self, sigma: float):
        self.sigma = sigma

    @abstractmethod
    def laplace_exponent(self, z: complex) -> complex:
        """
        Evaluate phi(z).

        :param z: Complex point away from the poles
        :type z: complex
        :return: phi(z)
        :rtype: complex
        :raises SingularityError: Too close to a pole
        """

    @property
    @abstractmethod
    def n_poles(self) -> Optional[int]:
        """Number of positive poles, None when the sequence is infinite."""

    @abstractmethod
    def pole(self, n: int) -> float:
        """
        Positive pole rho_n, 1-based; pole(0) is the origin.

        :param n: Pole index
        :type n: int
        :return: rho_n
        :rtype: float
        """

    @abstractmethod
    def phi_anchored(self, anchor: int, offset: float) -> float:
        """
        Real value of phi at z = pole(anchor) + offset, with the singular part evaluated
        from the offset itself so points extremely close to a pole keep full precision.

        :param anchor: Pole index (0 means the origin)
        :type anchor: int
        :param offset: Signed distance from the anchor pole
        :type offset: float
        :return: phi(pole(anchor) + offset)
        :rtype: float
        """

    @abstractmethod
    def mirror(self) -> "LevyModel":
        """Model of the negated process -X; its positive poles are our negative ones."""

    def side(self, side: str) -> "LevyModel":
        """
        Model whose positive half-line carries the requested side.

        :param side: "pos" or "neg"
        :type side: str
        :return: self or the mirrored model
        :rtype: LevyModel
        """
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {side!r}")
        return self if side == "pos" else self.mirror()
