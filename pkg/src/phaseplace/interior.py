"""Placement strategies for the inside of a single bucket.

A bucket owns a contiguous run of cells and a region of value space (an
interval for d = 1, a run of serpentine-consecutive grid blocks for d >= 2).
The engine guarantees only in-region points reach a bucket in normal
operation; the strategy decides which cell each one gets, online and
irrevocably, and must behave sanely under adversarial input order.

The segmented schemes use the classic sqrt decomposition. A bucket of m cells
is cut into ceil(sqrt(m))-cell contiguous segments, and its value region into
roughly sqrt(m) classes of equal extent. Each arriving point goes to the open
segment of its class; a class whose segment is full claims the leftmost
unclaimed segment; when nothing can be claimed the point borrows a cell from
the nearest class that still has room. Any one segment then holds points of
a single small-diameter class, plus late borrowers from adjacent classes,
which keeps the within-bucket tour near sqrt(m) times the class diameter
even for adversarial arrival orders. (Sending late points to the leftmost
free cell instead looks simpler but is Theta(m) adversarially and
Theta(m^(3/4)) on uniform input: once claims run dry every stray lands an
unbounded distance from its class, and the tour pays the full bucket width
per stray. Borrowing from the nearest open class pays one class width per
displacement step instead, preserving the O(sqrt(m)) contract.)

For d >= 2 a bucket's region (an aligned run of serpentine-consecutive
blocks) is always an axis box, and the classes are the cells of a fresh
serpentine-ordered sub-grid laid over that box, splitting the physically
longest side first. Classes stay near-cubical with diameter about
region_diameter / m^(1/(2d)) regardless of the box aspect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BucketFull
from .geometry import BlockPartition

__all__ = [
    "LineContext",
    "GridContext",
    "SegmentedIntervalSort",
    "SegmentedBlockSort",
    "ArrivalOrder",
]

_CLASS_GRIDS: dict = {}  # sides tuple -> BlockPartition, shared across buckets


def _class_grid(sides: tuple) -> BlockPartition:
    part = _CLASS_GRIDS.get(sides)
    if part is None:
        part = _CLASS_GRIDS[sides] = BlockPartition(sides)
    return part


@dataclass(frozen=True)
class LineContext:
    """Line facts an interval bucket needs: fine-cell count plus optional
    warped cell boundaries (None means the uniform grid)."""

    k1: int
    boundaries: object = None  # np.ndarray of len k1 + 1, or None


@dataclass(frozen=True)
class GridContext:
    """Grid facts a block bucket needs: partition plus optional per-dimension
    warped boundaries (None means the uniform grid)."""

    partition: BlockPartition
    boundaries: tuple | None = None  # tuple of per-dim arrays, each len n_i + 1


class _SegmentedBucket:
    """Shared segment bookkeeping; subclasses map a point to a class index."""

    __slots__ = (
        "start", "cap", "fill", "sub",
        "seg_size", "n_segs", "last_len", "seg_fill",
        "class_seg", "next_unassigned",
    )

    def __init__(self, start: int, cap: int, sub: int, n_classes: int):
        self.start = start
        self.cap = cap
        self.fill = 0
        self.sub = sub
        s = math.isqrt(cap - 1) + 1 if cap > 0 else 1  # ceil(sqrt(cap))
        self.seg_size = s
        self.n_segs = (cap + s - 1) // s
        self.last_len = cap - s * (self.n_segs - 1)
        self.seg_fill = [0] * self.n_segs
        self.class_seg = [-1] * (n_classes + 1)
        self.next_unassigned = 0

    def _seg_len(self, seg: int) -> int:
        return self.last_len if seg == self.n_segs - 1 else self.seg_size

    def _nearest_open(self, c: int) -> int:
        """Open segment of the class nearest to c (ties to the lower class).

        Only reached once every segment is claimed, at which point every
        non-full segment is some class's current claim, so the ring scan
        always lands while the bucket has room.
        """
        cs = self.class_seg
        sf = self.seg_fill
        nc = len(cs) - 1  # classes are 1-based
        for delta in range(1, nc + 1):
            cc = c - delta
            if cc >= 1:
                seg = cs[cc]
                if seg >= 0 and sf[seg] < self._seg_len(seg):
                    return seg
            cc = c + delta
            if cc <= nc:
                seg = cs[cc]
                if seg >= 0 and sf[seg] < self._seg_len(seg):
                    return seg
        seg = 0  # stale-claim safety net: sweep for any hole
        while sf[seg] >= self._seg_len(seg):
            seg += 1
        return seg

    def _place_class(self, c: int) -> int:
        if self.fill >= self.cap:
            raise BucketFull(f"bucket at cell {self.start} is full ({self.cap})")
        sf = self.seg_fill
        seg = self.class_seg[c]
        if seg < 0 or sf[seg] >= self._seg_len(seg):
            nu = self.next_unassigned
            if nu < self.n_segs:
                self.class_seg[c] = seg = nu
                self.next_unassigned = nu + 1
            else:
                seg = self._nearest_open(c)
        off = sf[seg]
        sf[seg] = off + 1
        self.fill += 1
        return self.start + seg * self.seg_size + off


class _IntervalBucket(_SegmentedBucket):
    """Segmented bucket over a half-open value interval (lo, hi]."""

    __slots__ = ("lo", "scale", "n_classes")

    def __init__(self, start, cap, lo, hi, sub):
        s = math.isqrt(cap - 1) + 1 if cap > 0 else 1
        super().__init__(start, cap, sub, n_classes=s)
        self.n_classes = s
        self.lo = lo
        self.scale = s / (hi - lo)

    def place(self, x: float, key=None) -> int:
        c = math.ceil((x - self.lo) * self.scale)
        if c < 1:
            c = 1
        elif c > self.n_classes:
            c = self.n_classes
        return self._place_class(c)


class _WarpedIntervalBucket(_SegmentedBucket):
    """Segmented bucket over fine quantile cells [idx_lo, idx_lo + span).

    Classes split the bucket's probability mass equally, not its value
    extent: position is measured in quantile-cell units through the
    boundary grid. Equal-value classes would starve under a skewed
    density (most classes near-empty, the heavy ones borrowing across
    the whole bucket), which is exactly the failure the class scheme is
    supposed to prevent.
    """

    __slots__ = ("idx_lo", "span", "bnds", "n_classes")

    def __init__(self, start, cap, idx_lo, span, bnds, sub):
        s = math.isqrt(cap - 1) + 1 if cap > 0 else 1
        super().__init__(start, cap, sub, n_classes=s)
        self.n_classes = s
        self.idx_lo = idx_lo
        self.span = span
        self.bnds = bnds

    def place(self, x: float, key: int = None) -> int:
        blo = self.bnds[key - 1]
        w = (key - self.idx_lo) + (x - blo) / (self.bnds[key] - blo)
        c = math.ceil(w * self.n_classes / self.span)
        if c < 1:
            c = 1
        elif c > self.n_classes:
            c = self.n_classes
        return self._place_class(c)


class _BlockBucket(_SegmentedBucket):
    """Segmented bucket over serpentine blocks [order_lo, order_lo + count).

    An aligned run of 2^j consecutive serpentine blocks is always an axis
    box in the grid (the order nests dimension 0 fastest, so a run fills
    whole rows, then whole planes, before touching the next dimension).
    The bucket carves its box into a fresh power-of-two class grid with
    about sqrt(m) cells, halving the physically longest side first so the
    classes stay near-cubical whatever the box aspect, and orders the
    classes serpentine so that neighboring class indices are neighboring
    regions (which is what makes nearest-class borrowing cheap).
    """

    __slots__ = (
        "order_lo", "n_classes", "sides", "bnds", "coords_by_order",
        "box_lo", "box_ext", "class_part", "class_sides",
    )

    def __init__(self, start, cap, order_lo, order_count, ctx: GridContext, sub):
        part = ctx.partition
        sides = part.sides
        v0 = part.coords_by_order()[order_lo - 1]
        box_lo, box_ext = [], []
        rem = order_count
        for t, g in enumerate(sides):
            e = rem if rem < g else g
            box_ext.append(e)
            box_lo.append((v0[t] - 1) // e * e + 1)
            rem //= e
        target = math.isqrt(cap - 1) + 1 if cap > 0 else 1
        csides = [1] * part.d
        for _ in range((target - 1).bit_length()):
            t = max(range(part.d),
                    key=lambda u: box_ext[u] / (sides[u] * csides[u]))
            csides[t] *= 2
        self.class_part = _class_grid(tuple(csides))
        self.class_sides = self.class_part.sides
        super().__init__(start, cap, sub, n_classes=self.class_part.num_blocks)
        self.n_classes = self.class_part.num_blocks
        self.order_lo = order_lo
        self.sides = sides
        self.bnds = ctx.boundaries
        self.coords_by_order = part.coords_by_order()
        self.box_lo = tuple(box_lo)
        self.box_ext = tuple(box_ext)

    def place(self, x, key: int = None) -> int:
        v = self.coords_by_order[key - 1]
        cc = []
        if self.bnds is None:
            for xi, gi, bt, et, ci in zip(
                    x, self.sides, self.box_lo, self.box_ext, self.class_sides):
                t = math.ceil((xi * gi - (bt - 1)) * ci / et)
                cc.append(1 if t < 1 else (ci if t > ci else t))
        else:
            for xi, vi, bi, bt, et, ci in zip(
                    x, v, self.bnds, self.box_lo, self.box_ext, self.class_sides):
                blo = bi[vi - 1]
                w = (vi - bt) + (xi - blo) / (bi[vi] - blo)
                t = math.ceil(w * ci / et)
                cc.append(1 if t < 1 else (ci if t > ci else t))
        return self._place_class(self.class_part.order_index(cc))


class _ArrivalBucket:
    """Cells handed out in arrival order, no geometry at all."""

    __slots__ = ("start", "cap", "fill", "sub")

    def __init__(self, start, cap, sub):
        self.start = start
        self.cap = cap
        self.fill = 0
        self.sub = sub

    def place(self, x, key=None) -> int:
        if self.fill >= self.cap:
            raise BucketFull(f"bucket at cell {self.start} is full ({self.cap})")
        cell = self.start + self.fill
        self.fill += 1
        return cell


class SegmentedIntervalSort:
    """Segment/class scheme on value intervals; the d = 1 default.

    domain is a fine-cell index range (idx_lo, span). Under the uniform
    distribution that maps back to a plain value interval; under a warped
    one the bucket classes points by quantile mass instead.
    """

    name = "segmented_interval"

    def new_bucket(self, start, cap, domain, sub, ctx=None):
        idx_lo, span = domain
        if ctx is None or ctx.boundaries is None:
            k1 = 1 if ctx is None else ctx.k1
            return _IntervalBucket(
                start, cap, (idx_lo - 1) / k1, (idx_lo - 1 + span) / k1, sub)
        return _WarpedIntervalBucket(
            start, cap, idx_lo, span, ctx.boundaries, sub)


class SegmentedBlockSort:
    """Segment/class scheme on serpentine block runs; the d >= 2 default."""

    name = "segmented_blocks"

    def new_bucket(self, start, cap, domain, sub, ctx=None):
        if ctx is None:
            raise ValueError("block strategy needs a GridContext")
        order_lo, order_count = domain
        return _BlockBucket(start, cap, order_lo, order_count, ctx, sub)


class ArrivalOrder:
    """First come, first cell. Used standalone when d >= ell, where any
    placement is within a constant factor of optimal."""

    name = "arrival_order"

    def new_bucket(self, start, cap, domain, sub, ctx=None):
        return _ArrivalBucket(start, cap, sub)
