"""Exception types shared across the toolkit."""

from __future__ import annotations


class DensikitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(DensikitError):
    """Malformed expression or certificate text."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class BudgetError(DensikitError):
    """A computation exceeded its reduction step budget."""


class CertificateError(DensikitError):
    """A certificate object violates a structural precondition."""
