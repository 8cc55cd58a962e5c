"""Core model: points, write-once arrays, tour cost, and sizing rules.

Values live in [0, 1]^d. An algorithm run fills an array of n cells with one
point per cell, irrevocably; its cost is the total Euclidean length of the
polyline visiting the cells in index order. For d = 1 the offline optimum is
simply max - min (sorted order), which is what competitive ratios divide by.

The bucket-count exponent ell is the unique positive integer with

    n / (4 * log2(n)^p)  <  2^ell  <=  n / (2 * log2(n)^p)

computed in float64 and corrected to exact integer comparisons against the
float upper bound. Existence requires n / (2 * log2(n)^p) >= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import (
    EmptyInput,
    IncompleteArray,
    CellOccupied,
    InstanceTooSmall,
    NonMonotoneQuantile,
)

__all__ = [
    "ValuePoint",
    "DistributionSpec",
    "AlgorithmConfig",
    "PlacementArray",
    "compute_ell",
    "tour_cost",
    "opt_sort_cost",
    "quantile_boundaries",
]

# A point is a bare float for d = 1, else a tuple of d floats.
ValuePoint = Union[float, tuple]

_VALIDATION_GRID = 1025  # quantile monotonicity is spot-checked on this many points
_ENDPOINT_TOL = 1e-9


def _as_u_array(u) -> np.ndarray:
    arr = np.asarray(u, dtype=np.float64)
    return arr


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling law for coordinates, given by a quantile function Q.

    kind is 'uniform' (Q is the identity) or 'inverse_cdf'. Q maps [0, 1] to
    [0, 1], is nondecreasing, and must accept numpy arrays. For d > 1 the same
    Q is applied to every coordinate independently.
    """

    kind: str
    name: str = "uniform"
    _fn: Callable | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "inverse_cdf"):
            raise ValueError(f"unknown distribution kind: {self.kind!r}")
        if self.kind == "inverse_cdf":
            if self._fn is None:
                raise ValueError("inverse_cdf distribution needs a quantile function")
            grid = np.linspace(0.0, 1.0, _VALIDATION_GRID)
            vals = self.transform(grid)
            if abs(float(vals[0])) > _ENDPOINT_TOL or abs(float(vals[-1]) - 1.0) > _ENDPOINT_TOL:
                raise NonMonotoneQuantile(
                    f"quantile endpoints Q(0)={vals[0]!r}, Q(1)={vals[-1]!r} not 0 and 1"
                )
            if np.any(np.diff(vals) < -_ENDPOINT_TOL):
                raise NonMonotoneQuantile("quantile function decreases on validation grid")

    @staticmethod
    def uniform() -> "DistributionSpec":
        return DistributionSpec(kind="uniform")

    @staticmethod
    def from_quantile(fn: Callable, name: str = "inverse_cdf") -> "DistributionSpec":
        return DistributionSpec(kind="inverse_cdf", name=name, _fn=fn)

    @staticmethod
    def from_samples(u: Sequence[float], q: Sequence[float], name: str = "cdf_table") -> "DistributionSpec":
        """Piecewise-linear quantile through monotone (u, Q(u)) sample pairs."""
        uu = np.asarray(u, dtype=np.float64)
        qq = np.asarray(q, dtype=np.float64)
        if uu.ndim != 1 or uu.shape != qq.shape or len(uu) < 2:
            raise ValueError("need two equal-length 1-d sample vectors")
        if np.any(np.diff(uu) <= 0):
            raise NonMonotoneQuantile("u samples must be strictly increasing")
        fn = lambda x: np.interp(x, uu, qq)
        return DistributionSpec(kind="inverse_cdf", name=name, _fn=fn)

    def transform(self, u) -> np.ndarray:
        """Map uniform draws through Q, elementwise."""
        arr = _as_u_array(u)
        if self.kind == "uniform":
            return arr
        out = self._fn(arr)
        return np.asarray(out, dtype=np.float64)


@dataclass(frozen=True)
class AlgorithmConfig:
    """Run parameters for the placement algorithm."""

    n: int
    d: int = 1
    log_exponent: float = 2.0      # p in the log2(n)^p capacity scale, [1, 3]
    backyard_constant: float = 100.0
    seed: int = 0
    distribution: DistributionSpec = field(default_factory=DistributionSpec.uniform)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError("d must be an integer >= 1")
        if not (1.0 <= self.log_exponent <= 3.0):
            raise ValueError("log_exponent must lie in [1, 3]")
        if self.backyard_constant <= 0:
            raise ValueError("backyard_constant must be positive")
        if not isinstance(self.seed, int) or not (0 <= self.seed < (1 << 64)):
            raise ValueError("seed must be a 64-bit unsigned integer")


def compute_ell(n: int, log_exponent: float = 2.0) -> int:
    """Bucket-count exponent: unique ell with n/(4 L) < 2^ell <= n/(2 L), L = log2(n)^p."""
    if not isinstance(n, int) or n < 2:
        raise ValueError("n must be an integer >= 2")
    upper = n / (2.0 * math.log2(n) ** log_exponent)
    if upper < 2.0:
        raise InstanceTooSmall(
            f"n={n} admits no bucket exponent at log_exponent={log_exponent} "
            f"(upper bound {upper:.4g} < 2)"
        )
    ell = int(math.floor(math.log2(upper)))
    # guard against float rounding at exact powers of two
    while (1 << ell) > upper:
        ell -= 1
    while (1 << (ell + 1)) <= upper:
        ell += 1
    return ell


class PlacementArray:
    """Fixed-size array of cells, each written at most once.

    Coordinates are stored as an (n, d) float64 block; an unwritten cell is
    NaN. Writes are guarded: a second write to any cell raises CellOccupied.
    """

    __slots__ = ("n", "d", "_coords", "_occ", "_filled")

    def __init__(self, n: int, d: int = 1):
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        self.n = n
        self.d = d
        self._coords = np.full((n, d), np.nan, dtype=np.float64)
        self._occ = bytearray(n)
        self._filled = 0

    @classmethod
    def from_points(cls, points: Sequence, d: int | None = None) -> "PlacementArray":
        pts = list(points)
        if not pts:
            raise EmptyInput("cannot build an array from no points")
        first = pts[0]
        dim = d if d is not None else (len(first) if isinstance(first, (tuple, list)) else 1)
        arr = cls(len(pts), dim)
        for i, p in enumerate(pts):
            arr.write(i, p)
        return arr

    def __len__(self) -> int:
        return self.n

    @property
    def filled_count(self) -> int:
        return self._filled

    @property
    def complete(self) -> bool:
        return self._filled == self.n

    def is_filled(self, i: int) -> bool:
        return bool(self._occ[i])

    def write(self, i: int, point: ValuePoint) -> None:
        if self._occ[i]:
            raise CellOccupied(f"cell {i} already holds a point")
        if self.d == 1 and not isinstance(point, (tuple, list, np.ndarray)):
            self._coords[i, 0] = point
        else:
            if len(point) != self.d:
                raise ValueError(f"point has {len(point)} coords, array has d={self.d}")
            self._coords[i] = point
        self._occ[i] = 1
        self._filled += 1

    def point(self, i: int):
        """Stored point, or None for an empty cell. Scalar for d = 1."""
        if not self._occ[i]:
            return None
        if self.d == 1:
            return float(self._coords[i, 0])
        return tuple(float(c) for c in self._coords[i])

    def as_array(self) -> np.ndarray:
        """Read-only (n, d) coordinate view; NaN rows are unwritten cells."""
        view = self._coords.view()
        view.flags.writeable = False
        return view


def tour_cost(array: PlacementArray) -> float:
    """Euclidean length of the cell-order polyline. Requires a complete array."""
    if not array.complete:
        raise IncompleteArray(
            f"array has {array.n - array.filled_count} empty cells of {array.n}"
        )
    coords = array.as_array()
    if array.n < 2:
        return 0.0
    diffs = np.diff(coords, axis=0)
    return float(np.sqrt((diffs * diffs).sum(axis=1)).sum())


def opt_sort_cost(values: Iterable[float]) -> float:
    """Offline optimum for d = 1: the value range max - min."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("opt_sort_cost needs at least one value")
    return float(arr.max() - arr.min())


def quantile_boundaries(dist: DistributionSpec, k: int) -> np.ndarray:
    """Equal-probability-mass bucket boundaries b_j = Q(j / k), j = 0..k.

    Strictly increasing, else NonMonotoneQuantile: equal-mass bucketing is
    ill-defined where Q is flat at this resolution.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    u = np.arange(k + 1, dtype=np.float64) / k
    b = dist.transform(u)
    if np.any(np.diff(b) <= 0):
        raise NonMonotoneQuantile(f"quantile not strictly increasing on the {k}-grid")
    return b
