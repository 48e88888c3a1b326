"""Exception and warning classes raised by torsionlab."""


class TorsionLabError(Exception):
    """Base class for all torsionlab errors."""


class DimensionError(TorsionLabError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class ConvergenceError(TorsionLabError, ArithmeticError):
    """The eigenvalue iteration or a reordering step failed."""


class NonDegeneracyError(TorsionLabError, ValueError):
    """A bilinear form is singular or too badly conditioned to invert."""


class ValidationError(TorsionLabError, ValueError):
    """A complex, form or model violates one of its invariants."""


class InvalidBasisError(TorsionLabError, ValueError):
    """Columns do not form a basis of the cohomology."""


class ChiralityError(TorsionLabError, ValueError):
    """A chirality operator is not an involution exchanging the parities."""


class PairingError(TorsionLabError, ValueError):
    """The chirality operator does not restrict to an isomorphism of a window."""


class GaugeError(TorsionLabError, ValueError):
    """A gauge transformation does not intertwine the given differentials."""


class EigenvalueCrossingError(TorsionLabError, ValueError):
    """An eigenvalue modulus crosses the window threshold along a path."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ParseError(TorsionLabError, ValueError):
    """A model or scenario file does not follow its schema."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class WindowBoundaryWarning(UserWarning):
    """A threshold lies so close to an eigenvalue modulus that the window is ambiguous."""


class AmbiguousZeroWarning(UserWarning):
    """Some eigenvalue is too close to the zero tolerance to classify."""
