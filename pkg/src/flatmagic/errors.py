"""Exception types raised across the package."""


class FlatMagicError(Exception):
    """Base class for all package errors."""


class InvalidDimension(FlatMagicError, ValueError):
    """A size or shape argument is out of range."""


class InvalidInput(FlatMagicError, ValueError):
    """An argument violates a structural precondition."""


class ResourceLimit(FlatMagicError, MemoryError):
    """The requested computation exceeds the memory guardrail."""


class SamplingFailure(FlatMagicError, RuntimeError):
    """A sampler exhausted its retry budget."""
