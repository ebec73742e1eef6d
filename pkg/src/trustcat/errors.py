"""Exception hierarchy shared across trustcat modules."""

from __future__ import annotations


class TrustcatError(Exception):
    """Base class for every error raised by trustcat."""


class InputError(TrustcatError):
    """Malformed input: bad syntax, schema violations, unreadable files.

    The CLI maps every subclass to exit code 3.
    """


class InputSyntaxError(InputError):
    """Input could not be parsed at all (empty stream, invalid JSON/CSV)."""

    def __init__(self, message: str, location: str | None = None) -> None:
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SchemaError(InputError):
    """Input parsed but a field is missing or has the wrong shape."""

    def __init__(self, message: str, field: str | None = None) -> None:
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class InvariantViolation(InputError):
    """A typed invariant of the domain model is violated."""
