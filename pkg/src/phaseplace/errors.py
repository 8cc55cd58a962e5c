"""Exception taxonomy shared across the package."""

from __future__ import annotations

__all__ = [
    "PhaseplaceError",
    "InstanceTooSmall",
    "EmptyInput",
    "IncompleteArray",
    "CellOccupied",
    "NonMonotoneQuantile",
    "NegativeBucketSize",
    "BucketFull",
    "ArrayFull",
    "TooLarge",
]


class PhaseplaceError(Exception):
    """Base class for package errors."""


class InstanceTooSmall(PhaseplaceError):
    """n is too small for a valid bucket-count exponent at the given log exponent."""


class EmptyInput(PhaseplaceError):
    """An operation that needs at least one value received none."""


class IncompleteArray(PhaseplaceError):
    """Tour cost requested on an array with empty cells."""


class CellOccupied(PhaseplaceError):
    """Attempt to write an already-filled cell; placements are irrevocable."""


class NonMonotoneQuantile(PhaseplaceError):
    """Quantile function is not strictly increasing at the requested resolution."""


class NegativeBucketSize(PhaseplaceError):
    """A bin's leftover cells exceed its capacity allocation (strict layout mode)."""


class BucketFull(PhaseplaceError):
    """Placement requested into a bucket with no remaining cells."""


class ArrayFull(PhaseplaceError):
    """Placement requested but every cell is occupied."""


class TooLarge(PhaseplaceError):
    """Exact oracle requested beyond its tractable instance size."""
