"""Exception types shared across the package."""


class GtnlError(Exception):
    """Base class for all package errors."""


class ValidationError(GtnlError, ValueError):
    """Input outside the documented domain (parameter range, shape, index)."""


class NullOutcome(GtnlError):
    """Post-selection on an event of (numerically) zero probability."""


class DegenerateOutcome(GtnlError):
    """A closed-form normalization vanishes, so the target state is undefined."""


class NotXState(GtnlError, ValueError):
    """Matrix has weight outside the main diagonal and anti-diagonal."""


class MissingMonomial(GtnlError, KeyError):
    pass


class ParseError(GtnlError, ValueError):
    """Malformed facet file. The message carries record context."""


class DuplicateId(GtnlError, ValueError):
    pass


class BracketError(GtnlError):
    """Bisection endpoints do not bracket a violation crossing."""


class NonMonotoneWarning(UserWarning):
    """Raised as a warning when a bisection midpoint breaks the bracket ordering."""
