"""Exception hierarchy shared by all modules."""


class PrincipalPointsError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(PrincipalPointsError, ValueError):
    """A distribution parameter violates its family constraint."""


class UnknownDistributionError(PrincipalPointsError, KeyError):
    """Requested family is not part of the catalog."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown distribution"


class QuadratureError(PrincipalPointsError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget.

    The best value and its error estimate are kept on the exception so that
    callers can decide whether the result is still usable.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class ConvergenceError(PrincipalPointsError, ArithmeticError):
    """An iteration (Newton or Lloyd) did not reach its tolerance."""

    def __init__(self, message, points=None, residual=None, iterations=None):
        super().__init__(message)
        self.points = points
        self.residual = residual
        self.iterations = iterations


class OrderingError(ConvergenceError):
    """Step halving could not keep the iterate strictly increasing and interior."""


class SingularMatrixError(PrincipalPointsError, ArithmeticError):
    """A pivot of the tridiagonal elimination fell below the singularity threshold."""


class ZeroMassCellError(PrincipalPointsError, ArithmeticError):
    """A Voronoi cell carries (numerically) no probability mass."""
