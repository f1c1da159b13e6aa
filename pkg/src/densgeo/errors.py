"""Exception hierarchy.

``ConfigError`` subclasses map to CLI exit code 1, ``NumericalError``
subclasses to exit code 2.
"""


class DensGeoError(Exception):
    """Base class for all package errors."""


class ConfigError(DensGeoError, ValueError):
    """Invalid input, configuration or usage."""


class NumericalError(DensGeoError, ArithmeticError):
    """A computation left its domain of validity."""


class WrongDimension(ConfigError):
    pass


class MeanNotZero(NumericalError):
    pass


class PositivityLost(NumericalError):
    pass


class PastBreakdown(NumericalError):
    pass


class Stationary(NumericalError):
    pass


class BlowupDetected(NumericalError):
    pass


class NonDiffeomorphic(NumericalError):
    pass


class InverseDiverged(NumericalError):
    pass


class MonotonicityLost(NumericalError):
    pass


class DegenerateTriple(NumericalError):
    pass


class SingularM(NumericalError):
    pass


class SingularA(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class ConstraintViolated(NumericalError):
    pass


class ZeroNode(NumericalError):
    pass


class NotInNonvanishingClass(ZeroNode):
    pass


class WindingDetected(NumericalError):
    pass


class ZeroCurvature(NumericalError):
    pass
