"""Exception hierarchy shared by all demasq modules."""


class DemasqError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DemasqError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ShapeError(DemasqError, ValueError):
    """Array dimensions do not match the model or operation contract."""


class DegenerateEmbeddingError(DemasqError):
    """Constant-valued embedding: zero variance leaves the Doppler medium
    speed undefined."""


class SingularDenominatorError(DemasqError):
    """The Doppler denominator c - v_s is not strictly positive."""


class StaleTraceError(DemasqError):
    """An activation trace was produced by different model parameters."""


class PersistenceError(DemasqError):
    """A weight file is corrupt, truncated, or has an unsupported version."""


class ParseError(DemasqError, ValueError):
    """A dataset line could not be parsed.  Carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ValidationError(DemasqError, ValueError):
    """A parsed record violates the dataset schema."""


class ConfigurationError(DemasqError):
    """Training or split configuration is unusable for the given data."""
