class QConvexError(Exception):
    """Base class for errors raised by qconvex."""


class InvalidInputError(QConvexError, ValueError):
    """Malformed instance, dimension mismatch or non-finite data."""


class NumericalFailure(QConvexError, ArithmeticError):
    """A decomposition or root-finder did not produce a usable result."""
