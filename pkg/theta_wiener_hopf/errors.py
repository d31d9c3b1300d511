"""
Exception hierarchy for the Wiener-Hopf engine.

Every error raised on purpose by the package derives from WienerHopfError so
callers (and the CLI) can tell numerical failures apart from programming bugs.
"""

from typing import Optional


class WienerHopfError(Exception):
    """Base class for all engine errors."""


class DomainError(WienerHopfError, ValueError):
    """An argument lies outside the domain of the requested function."""


class SingularityError(WienerHopfError):
    """
    Evaluation too close to a pole.

    :param message: Human readable description
    :type message: str
    :param pole_index: Index of the offending pole, if known
    :type pole_index: Optional[int]
    """

    def __init__(self, message: str, pole_index: Optional[int] = None):
        super().__init__(message)
        self.pole_index = pole_index


class AccuracyError(WienerHopfError):
    """
    Requested accuracy could not be reached.

    :param message: Human readable description
    :type message: str
    :param achieved: Best error bound that was reached
    :type achieved: float
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class StructuralError(WienerHopfError):
    """A structural guarantee (sign change, positivity) was violated; signals an evaluation bug."""


class CalibrationError(WienerHopfError):
    """Drift or gamma calibration did not converge."""


class UnsupportedRegimeError(WienerHopfError):
    """No asymptotic root expansion exists for this parameter regime."""


class ConfigurationError(WienerHopfError):
    """Inconsistent run configuration (simulation sizes, tolerances)."""


class ParameterValidationError(WienerHopfError):
    """
    Parameter file or parameter bundle failed validation.

    :param field: Name of the offending field
    :type field: str
    :param message: Human readable description
    :type message: str
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
