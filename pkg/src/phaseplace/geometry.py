"""Axis-aligned block partitions of [0, 1]^d with a serpentine visit order.

A partition is produced by repeatedly halving the cube, one dimension per
split in round-robin order (split r acts on dimension ((r - 1) mod d) + 1), so
after ell splits there are 2^ell congruent boxes. Blocks are addressed by
1-based integer coordinates v with v_i in [1, n_i].

The serpentine (boustrophedon) order walks the grid so that consecutive
blocks always share a face: advance the lowest dimension that can move in its
current direction, flipping the direction of each blocked dimension along the
way. The closed-form rank of a block under this order depends on the parity
of its higher coordinates; `order_index` implements it and is cross-checked
against the walk itself in the test suite.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

__all__ = ["BlockPartition", "merged_key"]


class BlockPartition:
    """Power-of-two grid over [0, 1]^d, immutable once built."""

    __slots__ = ("d", "sides", "_strides", "_order_array", "_coords_by_order")

    def __init__(self, sides: Sequence[int]):
        sides = tuple(int(s) for s in sides)
        if not sides:
            raise ValueError("need at least one dimension")
        for s in sides:
            if s < 1 or (s & (s - 1)) != 0:
                raise ValueError(f"sides must be powers of two >= 1, got {sides}")
        self.d = len(sides)
        self.sides = sides
        strides = []
        acc = 1
        for s in sides:
            strides.append(acc)
            acc *= s
        self._strides = tuple(strides)
        self._order_array = None
        self._coords_by_order = None

    @classmethod
    def build(cls, d: int, ell: int) -> "BlockPartition":
        """Round-robin construction: ell halvings starting at dimension 1."""
        if d < 1 or ell < 0:
            raise ValueError("need d >= 1 and ell >= 0")
        sides = [1] * d
        for r in range(ell):
            sides[r % d] *= 2
        return cls(sides)

    def split(self, dim: int) -> "BlockPartition":
        """New partition with dimension `dim` (1-based) halved once more."""
        if not (1 <= dim <= self.d):
            raise ValueError(f"dim must be in [1, {self.d}]")
        sides = list(self.sides)
        sides[dim - 1] *= 2
        return BlockPartition(sides)

    @property
    def num_blocks(self) -> int:
        return self._strides[-1] * self.sides[-1]

    def block_of(self, x: Sequence[float]) -> tuple:
        """Coordinates of the block containing x; boundaries belong to the
        lower-index block (half-open from above), and x_i = 0 maps to 1."""
        if len(x) != self.d:
            raise ValueError(f"point has {len(x)} coords, partition has d={self.d}")
        v = []
        for xi, ni in zip(x, self.sides):
            if not (0.0 <= xi <= 1.0):
                raise ValueError(f"coordinate {xi!r} outside [0, 1]")
            c = math.ceil(xi * ni)
            v.append(1 if c < 1 else (ni if c > ni else c))
        return tuple(v)

    def block_bounds(self, v: Sequence[int]) -> list:
        """[(lo_i, hi_i)] box of block v."""
        return [((vi - 1) / ni, vi / ni) for vi, ni in zip(v, self.sides)]

    def serpentine_order(self) -> Iterator[tuple]:
        """Yield all blocks in serpentine order, starting at (1, ..., 1)."""
        sides = self.sides
        d = self.d
        v = [1] * d
        m = [1] * d
        yield tuple(v)
        for _ in range(self.num_blocks - 1):
            j = 0
            while v[j] + m[j] > sides[j] or v[j] + m[j] < 1:
                m[j] = -m[j]
                j += 1
            v[j] += m[j]
            yield tuple(v)

    def order_index(self, v: Sequence[int]) -> int:
        """Serpentine rank of block v, in [1, num_blocks], without walking.

        Dimension i counts forward when the number of even coordinates among
        dimensions above i is even, backward otherwise.
        """
        sides = self.sides
        strides = self._strides
        o = 0
        even_above = 0
        for i in range(self.d - 1, -1, -1):
            vi = v[i]
            if not (1 <= vi <= sides[i]):
                raise ValueError(f"coordinate {vi} outside [1, {sides[i]}]")
            if even_above % 2 == 0:
                o += (vi - 1) * strides[i]
            else:
                o += (sides[i] - vi) * strides[i]
            if vi % 2 == 0:
                even_above += 1
        return o + 1

    # ---- cached lookup tables (used by the engine and oracles) ----

    def _flat(self, v: Sequence[int]) -> int:
        return sum((vi - 1) * st for vi, st in zip(v, self._strides))

    def order_array(self) -> np.ndarray:
        """order_array()[flat(v)] = serpentine rank of v, flat in first-dim-fastest order."""
        if self._order_array is None:
            table = np.empty(self.num_blocks, dtype=np.int64)
            for rank, v in enumerate(self.serpentine_order(), start=1):
                table[self._flat(v)] = rank
            self._order_array = table
        return self._order_array

    def coords_by_order(self) -> list:
        """coords_by_order()[rank - 1] = block coordinates at that serpentine rank."""
        if self._coords_by_order is None:
            out = [None] * self.num_blocks
            for rank, v in enumerate(self.serpentine_order(), start=1):
                out[rank - 1] = v
            self._coords_by_order = out
        return self._coords_by_order

    def __eq__(self, other):
        return isinstance(other, BlockPartition) and self.sides == other.sides

    def __hash__(self):
        return hash(self.sides)

    def __repr__(self):
        return f"BlockPartition(sides={self.sides})"


def merged_key(order_idx: int, phase: int) -> int:
    """Bucket key at phase granularity: ceil(order_idx / 2^(phase-1)).

    Groups of 2^(phase-1) serpentine-consecutive blocks share a key, so every
    merged group is connected in the grid.
    """
    if order_idx < 1 or phase < 1:
        raise ValueError("order_idx and phase are 1-based")
    shift = phase - 1
    return (order_idx + (1 << shift) - 1) >> shift
