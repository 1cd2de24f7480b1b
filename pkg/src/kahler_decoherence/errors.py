"""Exception hierarchy."""
from __future__ import annotations


class DecoherenceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidState(DecoherenceError, ValueError):
    pass


class InvalidOperator(DecoherenceError, ValueError):
    pass


class InvalidMixture(DecoherenceError, ValueError):
    pass


class InvalidConfig(DecoherenceError, ValueError):
    pass


class InvalidGrid(DecoherenceError, ValueError):
    pass


class InvalidAxis(DecoherenceError, ValueError):
    pass


class NotKahler(DecoherenceError, ValueError):
    """Field carries harmonic content above the dipole."""


class UnphysicalState(DecoherenceError, ValueError):
    pass


class PoleSingularity(DecoherenceError, ValueError):
    pass


class BandLimitExceeded(DecoherenceError, ValueError):
    pass


class OutOfDomain(DecoherenceError, ValueError):
    pass


class ParseError(InvalidConfig):
    """Malformed configuration text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class ValidationError(InvalidConfig):
    """A configuration value is missing or invalid; ``field`` names it."""

    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field
