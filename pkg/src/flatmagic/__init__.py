"""Flat matrix models of quantum permutation groups: magic bases, character moments and flattening."""

__version__ = "0.1.0"

from .errors import FlatMagicError, InvalidDimension, InvalidInput, ResourceLimit, SamplingFailure  # noqa: E402

__all__ = ["FlatMagicError", "InvalidDimension", "InvalidInput", "ResourceLimit", "SamplingFailure",
           "__version__"]
