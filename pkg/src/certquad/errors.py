"""Exception hierarchy shared by every certquad module."""

from __future__ import annotations


class CertQuadError(Exception):
    """Base class for all library errors."""


class ParseError(CertQuadError):
    """Malformed expression source.

    ``offset`` is the byte offset into the UTF-8 encoded source where the
    problem was detected.
    """

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} (at byte {offset})")


class DomainError(CertQuadError, ArithmeticError):
    """A function was evaluated outside its natural domain."""


class OrderOverflowError(CertQuadError):
    """Requested derivative order exceeds the configured cap."""


class NotExactCapableError(CertQuadError):
    """The exact rational path was requested for a non-polynomial tree."""


class HypothesisViolated(CertQuadError):
    """A convexity/concavity hypothesis failed its grid check."""

    def __init__(self, verdict, message: str | None = None):
        self.verdict = verdict
        super().__init__(message or f"hypothesis violated: {verdict}")


class NoConvergenceError(CertQuadError):
    """The reference integrator could not meet its tolerance."""

    def __init__(self, message: str, value: float = float("nan"), error: float = float("nan")):
        self.value = value
        self.error = error
        super().__init__(message)
