"""Wiener-Hopf factorization of theta-family Levy processes."""

__version__ = "0.1.0"
