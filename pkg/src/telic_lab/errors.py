"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""


class TelicError(Exception):
    exit_code = 70


class DomainError(TelicError, ValueError):
    """A point lies outside the space it is used in."""

    exit_code = 65


class ParseError(TelicError, ValueError):
    exit_code = 65


class ValidationError(TelicError, ValueError):
    """An instance or system violates one of its invariants."""

    exit_code = 65


class ConfigError(ValidationError):
    pass


class ResourceLimit(TelicError):
    """A configured cap (bits, precision, enumeration size) would be exceeded."""

    exit_code = 75


class NotExact(TelicError):
    """The map has no exact rational evaluator; use ``step_approx``."""


class NotInvertible(TelicError):
    pass


class NotApplicable(TelicError):
    """A solver's or reduction's preconditions do not hold for this instance."""

    exit_code = 65


class InvariantViolation(TelicError):
    exit_code = 70
