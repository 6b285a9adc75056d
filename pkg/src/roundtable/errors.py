"""Exception types shared across the package."""

from __future__ import annotations


class RoundtableError(Exception):
    """Base class for all package-specific errors."""


class GatewayError(RoundtableError):
    """A gateway produced unusable output after its retry was exhausted."""


class TransportError(GatewayError):
    """A network-level failure; safe to retry once."""


class BudgetExhausted(RoundtableError):
    """The session's search budget has reached zero; the session must terminate."""


class EmptyMapError(RoundtableError):
    """An operation that needs a populated mind map was called on an empty one."""


class SchemaError(RoundtableError):
    """A data file failed validation.

    line is 1-based when the error is tied to a specific input line, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SessionTerminated(RoundtableError):
    """The session is in the Terminated phase and accepts no further turns."""
