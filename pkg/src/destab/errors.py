"""Exception types.

Two failure classes are kept apart on purpose: malformed input (a unit
system that is not inside its algebra, a morphism that breaks the unit
condition, ...) and a violated theorem, which can only mean a bug.
"""

from __future__ import annotations


class DestabError(Exception):
    """Base class for package errors."""


class InvalidInputError(DestabError, ValueError):
    """Input fails a validator; ``residuals`` says which law and by how much."""

    def __init__(self, message, residuals=None, **details):
        super().__init__(message)
        self.residuals = dict(residuals or {})
        self.details = details

    def diagnosis(self) -> dict:
        return {"error": str(self), "residuals": self.residuals, **self.details}

    def __str__(self):
        msg = super().__str__()
        if self.residuals:
            worst = max(self.residuals.items(), key=lambda kv: kv[1])
            msg += f" (worst: {worst[0]}={worst[1]:.3e})"
        return msg


class TheoremViolation(DestabError, AssertionError):
    """A certificate for a proven identity failed on valid input."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})
