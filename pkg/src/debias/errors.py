"""Exception types shared across the package."""


class DebiasError(Exception):
    """Base class for all package errors."""


class DomainError(DebiasError, ValueError):
    """An input lies outside the region where a formula or estimator is defined."""


class ResourceExceeded(DebiasError, RuntimeError):
    """A random cost (truncation level, sample count) exceeded its configured cap.

    Raised instead of truncating, since silently capping R biases the estimator.
    """


class NonFiniteEstimate(DebiasError, ArithmeticError):
    """The assembled estimate overflowed or produced NaN."""
