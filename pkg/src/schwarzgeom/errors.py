"""Exception hierarchy shared by all modules.

The CLI maps these onto exit statuses, so every failure raised by the
library should be one of them.
"""


class GeometryError(Exception):
    """Base class for library errors."""


class ParameterError(GeometryError, ValueError):
    """Invalid construction parameters (ambient constants, surface families, balls)."""


class DomainError(GeometryError, ValueError):
    """A point lies outside the domain where a quantity is defined."""


class PreconditionError(GeometryError, ValueError):
    """An operation's hypotheses (convexity, mean convexity, sign of inputs) fail."""


class NumericError(GeometryError, ArithmeticError):
    """Quadrature or root finding did not converge."""


class RegimeWarning(UserWarning):
    """An asymptotic formula is evaluated outside its intended regime."""
