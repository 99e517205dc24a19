"""Exception and warning types raised by the package."""


class QVarError(Exception):
    """Base class for all package errors."""


class DomainError(QVarError, ValueError):
    """Argument outside the region where an evaluation is numerically safe."""


class ConvergenceError(QVarError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


class TruncationError(ConvergenceError):
    """The Fourier series could not be truncated within the term cap."""


class InvalidDensity(QVarError, ValueError):
    """Density fails normalization, nonnegativity or exponent checks."""


class FitError(QVarError, ArithmeticError):
    """Polynomial remainder fit did not reach tolerance within the degree cap."""


class RangeError(QVarError, ValueError):
    """Evaluation point outside [0, sup Q]."""


class SizeError(QVarError, ValueError):
    """Problem size beyond a hard enumeration cap."""


class MismatchError(QVarError, ValueError):
    """Two objects that must describe the same distribution disagree."""


class SlowDecayWarning(UserWarning):
    """Density series used outside the regime where it is known to converge."""
