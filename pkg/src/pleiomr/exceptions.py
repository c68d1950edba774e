"""Exception hierarchy shared across the package.

ValidationError covers bad inputs and usage (CLI exit code 2);
NumericalError covers failures of the numerics themselves (exit code 3).
"""


class PleiomrError(Exception):
    """Base class for all package errors."""


class ValidationError(PleiomrError, ValueError):
    """Invalid input data, configuration, or usage."""


class NumericalError(PleiomrError, ArithmeticError):
    """Numerical failure: rank deficiency, degeneracy, non-convergence."""


class ConvergenceError(NumericalError):
    """Iterative solver failed to converge within its iteration budget."""
