"""Online placement engine: a sequence of balls-into-bins phases.

The array is carved into subarrays A_1, A_2, ... with |A_i| = floor(n / 2^i).
Phase 1 splits A_1 into K_1 = 2^ell equal buckets, one per key, where keys
come from equal-mass intervals (d = 1) or serpentine block order (d >= 2).
When some arrival finds every bucket for its key full, the engine spawns the
next phase: key granularity halves, and each new bin spans two old buckets
plus one fresh bucket in A_{i+1} sized so the bin's total free space matches
an equal split of all remaining free cells. Arrivals always try the oldest
open bucket covering their key first, so leftover space keeps draining.

Spawning stops once the cells beyond the spawned subarrays number fewer than
backyard_constant * log2(n)^p; that tail becomes the backyard B, which absorbs
key misses. If B itself fills, the run is marked failed and every later point
takes the lowest-indexed empty cell.

High-dimensional inputs (d >= ell, d >= 2) skip the phase machinery entirely
and place in arrival order; at that point any tour is constant-competitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    AlgorithmConfig,
    PlacementArray,
    compute_ell,
    quantile_boundaries,
)
from .errors import NegativeBucketSize
from .geometry import BlockPartition
from .interior import ArrivalOrder, GridContext, LineContext, SegmentedBlockSort, SegmentedIntervalSort

__all__ = [
    "PhaseRecord",
    "RunTrace",
    "EngineResult",
    "Engine",
    "designated_bucket",
    "next_phase_layout",
    "init_phase1",
    "place",
    "run",
    "region_arrays",
]

MODE_PHASES = "phases"
MODE_FINAL = "final"
MODE_FAILED = "failed"
MODE_ARRIVAL = "arrival_order"


def designated_bucket(x: float, k_buckets: int) -> int:
    """Key of x under k equal intervals, half-open from above: x in
    ((j-1)/k, j/k] maps to j, and x = 0 maps to 1."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"value {x!r} outside [0, 1]")
    j = math.ceil(x * k_buckets)
    return 1 if j < 1 else (k_buckets if j > k_buckets else j)


def next_phase_layout(prev_caps, prev_fills, a_next: int, *, clamp: bool = True):
    """Capacity plan for the next phase.

    Given the previous subarray's bucket capacities and current fills plus the
    next subarray length, returns (c_value, bin_caps, bucket_sizes, deficit).
    Free cells M = sum(prev_caps) + a_next - sum(prev_fills) are split across
    K/2 bins as floor(M / (K/2)) each, the remainder going one extra cell to
    the lowest-indexed bins. Each bin's new bucket gets the bin capacity minus
    the leftover free cells of its two parent buckets; a negative size either
    raises NegativeBucketSize (clamp=False) or is clamped to zero with the
    deficit taken back from the lowest-indexed positive buckets, keeping
    sum(bucket_sizes) == a_next exactly.
    """
    k_prev = len(prev_caps)
    if k_prev < 2 or k_prev % 2 != 0:
        raise ValueError("previous phase must have an even bucket count >= 2")
    if len(prev_fills) != k_prev:
        raise ValueError("fills and caps must align")
    k_next = k_prev // 2
    m_free = sum(prev_caps) + a_next - sum(prev_fills)
    c_value = m_free / k_next
    base = m_free // k_next
    rem = m_free - base * k_next
    bin_caps = [base + 1] * rem + [base] * (k_next - rem)
    sizes = []
    deficit = 0
    for j in range(k_next):
        leftover = (prev_caps[2 * j] - prev_fills[2 * j]) + (
            prev_caps[2 * j + 1] - prev_fills[2 * j + 1]
        )
        size = bin_caps[j] - leftover
        if size < 0:
            if not clamp:
                raise NegativeBucketSize(
                    f"bin {j + 1}: leftover {leftover} exceeds capacity {bin_caps[j]}"
                )
            deficit += -size
            size = 0
        sizes.append(size)
    if deficit:
        short = deficit
        for j in range(k_next):
            if short == 0:
                break
            cut = sizes[j] if sizes[j] < short else short
            sizes[j] -= cut
            short -= cut
    assert sum(sizes) == a_next, "bucket sizes must partition the next subarray"
    return c_value, bin_caps, sizes, deficit


# ---------------------------------------------------------------- tracing --


@dataclass
class PhaseRecord:
    """Everything observable about one phase of one run."""

    index: int                   # 1-based
    k_buckets: int
    a_len: int
    a_start: int
    c_value: float
    bin_caps: list
    bucket_sizes: list
    clamp_deficit: int
    start_arrival: int           # first arrival credited to this phase
    overflow_arrival: int | None = None
    full_arrival: int | None = None
    fills_at_overflow: int | None = None

    @property
    def insertions_until_overflow(self) -> int | None:
        """Arrivals credited to this phase before it overflowed (T)."""
        if self.overflow_arrival is None:
            return None
        return self.overflow_arrival - self.start_arrival

    @property
    def insertions_until_full(self) -> int | None:
        """Arrivals from this phase's start until its subarray filled (T')."""
        if self.full_arrival is None:
            return None
        return self.full_arrival - self.start_arrival + 1

    def to_dict(self) -> dict:
        return {
            "i": self.index,
            "k_buckets": self.k_buckets,
            "a_len": self.a_len,
            "a_start": self.a_start,
            "c_value": self.c_value,
            "bin_caps": list(self.bin_caps),
            "bucket_sizes": list(self.bucket_sizes),
            "clamp_deficit": self.clamp_deficit,
            "start_arrival": self.start_arrival,
            "overflow_arrival": self.overflow_arrival,
            "full_arrival": self.full_arrival,
            "n_fills_at_overflow": self.fills_at_overflow,
            "t_overflow": self.insertions_until_overflow,
            "t_full": self.insertions_until_full,
        }


@dataclass
class RunTrace:
    """Structured record of a single run, JSON-serializable via to_dict."""

    n: int
    d: int
    ell: int
    k1: int
    mode: str
    log_exponent: float
    backyard_constant: float
    seed: int
    distribution: str
    strategy: str
    phases: list = field(default_factory=list)
    k: int = 0
    backyard_start: int = 0
    backyard_size: int = 0
    backyard_fill: int = 0
    final_enter_arrival: int | None = None
    failure: bool = False
    fail_arrival: int | None = None
    failed_count: int = 0
    transitions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "ell": self.ell,
            "k1": self.k1,
            "mode": self.mode,
            "log_exponent": self.log_exponent,
            "backyard_constant": self.backyard_constant,
            "seed": self.seed,
            "distribution": self.distribution,
            "strategy": self.strategy,
            "k": self.k,
            "phases": [p.to_dict() for p in self.phases],
            "backyard": {
                "start": self.backyard_start,
                "size": self.backyard_size,
                "fill": self.backyard_fill,
            },
            "final_enter_arrival": self.final_enter_arrival,
            "failure": self.failure,
            "fail_arrival": self.fail_arrival,
            "failed_count": self.failed_count,
            "transitions": list(self.transitions),
        }


@dataclass
class EngineResult:
    array: PlacementArray
    trace: RunTrace


def region_arrays(trace: RunTrace, n: int):
    """(subarray_id, bucket_id) per cell, for cost attribution.

    Subarray ids are 0-based phase indices; the backyard gets id k. Bucket ids
    are globally unique. Arrival-order runs are a single region."""
    if trace.mode == MODE_ARRIVAL:
        return np.zeros(n, dtype=np.int32), np.zeros(n, dtype=np.int32)
    lengths, subs, bids = [], [], []
    gid = 0
    for rec in trace.phases:
        for size in rec.bucket_sizes:
            if size > 0:
                lengths.append(size)
                subs.append(rec.index - 1)
                bids.append(gid)
                gid += 1
    if trace.backyard_size > 0:
        lengths.append(trace.backyard_size)
        subs.append(trace.k)
        bids.append(gid)
    total = sum(lengths)
    if total != n:
        raise ValueError(f"regions cover {total} cells, array has {n}")
    sub_ids = np.repeat(np.asarray(subs, dtype=np.int32), lengths)
    bucket_ids = np.repeat(np.asarray(bids, dtype=np.int32), lengths)
    return sub_ids, bucket_ids


# ----------------------------------------------------------------- domains --


class LineDomain:
    """Keying for d = 1: equal-mass intervals of the value line."""

    def __init__(self, dist, ell: int):
        self.k1 = 1 << ell
        if dist.kind == "uniform":
            self.bounds = None
            self._inner = None
        else:
            self.bounds = quantile_boundaries(dist, self.k1)
            self._inner = np.ascontiguousarray(self.bounds[1:-1])
        self.strategy_ctx = LineContext(k1=self.k1, boundaries=self.bounds)

    def fine_keys(self, xs: np.ndarray) -> list:
        k1 = self.k1
        if self.bounds is None:
            keys = np.ceil(xs * k1)
            np.clip(keys, 1, k1, out=keys)
            return keys.astype(np.int64).tolist()
        return (np.searchsorted(self._inner, xs, side="left") + 1).tolist()

    def bucket_domain(self, phase: int, j: int):
        step = 1 << (phase - 1)
        return ((j - 1) * step + 1, step)

    def backyard_domain(self):
        return (1, self.k1)


class GridDomain:
    """Keying for d >= 2: serpentine order over a round-robin block grid."""

    def __init__(self, dist, ell: int, d: int):
        self.partition = BlockPartition.build(d, ell)
        self.k1 = self.partition.num_blocks
        self.sides = self.partition.sides
        if dist.kind == "uniform":
            self.boundaries = None
        else:
            self.boundaries = tuple(
                quantile_boundaries(dist, ni) for ni in self.sides
            )
        self._order = self.partition.order_array()
        self._strides = self.partition._strides
        self.strategy_ctx = GridContext(self.partition, self.boundaries)

    def fine_keys(self, xs: np.ndarray) -> list:
        flat = np.zeros(len(xs), dtype=np.int64)
        for i, (ni, stride) in enumerate(zip(self.sides, self._strides)):
            col = xs[:, i]
            if self.boundaries is None:
                vi = np.ceil(col * ni)
                np.clip(vi, 1, ni, out=vi)
                vi = vi.astype(np.int64)
            else:
                inner = self.boundaries[i][1:-1]
                vi = np.searchsorted(inner, col, side="left") + 1
            flat += (vi - 1) * stride
        return self._order[flat].tolist()

    def bucket_domain(self, phase: int, j: int):
        step = 1 << (phase - 1)
        return ((j - 1) * step + 1, step)

    def backyard_domain(self):
        return (1, self.k1)


# ------------------------------------------------------------------ engine --


class Engine:
    """Mutable run state. Build via init_phase1 or drive whole runs via run()."""

    def __init__(self, config: AlgorithmConfig, strategy=None, domain=None):
        self.cfg = config
        n, d = config.n, config.d
        self.ell = compute_ell(n, config.log_exponent)
        self.arr = PlacementArray(n, d)
        self._occ = self.arr._occ
        self._coords = self.arr._coords
        self._col = self._coords[:, 0] if d == 1 else None
        self.t = 0
        self.low_ptr = 0
        self.failed_count = 0
        self.transitions: list = []

        fallback = d >= 2 and d >= self.ell
        if fallback:
            self.mode = MODE_ARRIVAL
            self.domain = None
            self.strategy = ArrivalOrder()
            self.strategy_ctx = None
            self.trace = self._new_trace(MODE_ARRIVAL)
            return

        if domain is not None:
            self.domain = domain
        elif d == 1:
            self.domain = LineDomain(config.distribution, self.ell)
        else:
            self.domain = GridDomain(config.distribution, self.ell, d)
        self.strategy_ctx = self.domain.strategy_ctx
        if strategy is not None:
            self.strategy = strategy
        else:
            self.strategy = SegmentedIntervalSort() if d == 1 else SegmentedBlockSort()
        self.k1 = self.domain.k1
        self.threshold = config.backyard_constant * math.log2(n) ** config.log_exponent
        self.mode = MODE_PHASES
        self.backyard = None
        self.phases: list[PhaseRecord] = []
        self.buckets_by_phase: list[list] = []
        self.subfills: list[int] = []
        self.sublens: list[int] = []
        self.sub_full_arrival: list = []
        self.keylists: list = [None] + [[] for _ in range(self.k1)]
        self.trace = self._new_trace(MODE_PHASES)

        # phase 1: K1 equal buckets over A_1, remainder to the lowest indices
        a1 = n // 2
        base, rem = divmod(a1, self.k1)
        sizes = [base + 1] * rem + [base] * (self.k1 - rem)
        rec = PhaseRecord(
            index=1, k_buckets=self.k1, a_len=a1, a_start=0,
            c_value=a1 / self.k1, bin_caps=list(sizes), bucket_sizes=sizes,
            clamp_deficit=0, start_arrival=1,
        )
        blist = []
        offset = 0
        for j0, size in enumerate(sizes):
            b = self.strategy.new_bucket(
                offset, size, self.domain.bucket_domain(1, j0 + 1),
                sub=0, ctx=self.strategy_ctx,
            )
            blist.append(b)
            self.keylists[j0 + 1].append(b)
            offset += size
        self.phases.append(rec)
        self.buckets_by_phase.append(blist)
        self.subfills.append(0)
        self.sublens.append(a1)
        self.sub_full_arrival.append(None)
        self.consumed = a1

    def _new_trace(self, mode: str) -> RunTrace:
        cfg = self.cfg
        return RunTrace(
            n=cfg.n, d=cfg.d, ell=self.ell, k1=1 << self.ell, mode=mode,
            log_exponent=cfg.log_exponent, backyard_constant=cfg.backyard_constant,
            seed=cfg.seed, distribution=cfg.distribution.name,
            strategy=getattr(self, "strategy", None).name if hasattr(self, "strategy") else "",
        )

    # -- transitions ---------------------------------------------------------

    def _spawn_next(self, t: int) -> None:
        prev = self.phases[-1]
        i_next = prev.index + 1
        a_next = self.cfg.n >> i_next
        prev_buckets = self.buckets_by_phase[-1]
        fills = [0 if b is None else b.fill for b in prev_buckets]
        c_value, bin_caps, sizes, deficit = next_phase_layout(
            prev.bucket_sizes, fills, a_next
        )
        start = self.consumed
        rec = PhaseRecord(
            index=i_next, k_buckets=len(sizes), a_len=a_next, a_start=start,
            c_value=c_value, bin_caps=bin_caps, bucket_sizes=sizes,
            clamp_deficit=deficit, start_arrival=t,
        )
        step = 1 << (i_next - 1)
        blist = []
        offset = start
        keylists = self.keylists
        for j0, size in enumerate(sizes):
            if size == 0:
                blist.append(None)
                continue
            b = self.strategy.new_bucket(
                offset, size, self.domain.bucket_domain(i_next, j0 + 1),
                sub=i_next - 1, ctx=self.strategy_ctx,
            )
            blist.append(b)
            offset += size
            base_key = j0 * step
            for f in range(base_key + 1, base_key + step + 1):
                keylists[f].append(b)
        self.phases.append(rec)
        self.buckets_by_phase.append(blist)
        self.subfills.append(0)
        self.sublens.append(a_next)
        self.sub_full_arrival.append(None)
        self.consumed += a_next

    def _enter_final(self, t: int) -> None:
        n = self.cfg.n
        bstart = self.consumed
        bsize = n - bstart
        self.backyard = self.strategy.new_bucket(
            bstart, bsize, self.domain.backyard_domain(),
            sub=len(self.phases), ctx=self.strategy_ctx,
        )
        self.subfills.append(0)
        self.sublens.append(bsize)
        self.sub_full_arrival.append(None)
        self.consumed = n
        self.mode = MODE_FINAL
        tr = self.trace
        tr.k = len(self.phases)
        tr.backyard_start = bstart
        tr.backyard_size = bsize
        tr.final_enter_arrival = t

    def _mark_failed(self, t: int) -> None:
        self.mode = MODE_FAILED
        self.trace.failure = True
        self.trace.fail_arrival = t
        self.transitions.append(t)

    def _resolve_overflow(self, key: int, t: int):
        """Handle an arrival whose every open bucket is full; PHASES mode only.

        Returns the bucket to place into, or None if the run just failed."""
        while True:
            cur = self.phases[-1]
            cur.overflow_arrival = t
            cur.fills_at_overflow = self.subfills[cur.index - 1]
            self.transitions.append(t)
            remaining = self.cfg.n - self.consumed
            if remaining < self.threshold or cur.k_buckets == 1:
                self._enter_final(t)
                bb = self.backyard
                if bb.fill < bb.cap:
                    return bb
                self._mark_failed(t)
                return None
            self._spawn_next(t)
            lst = self.keylists[key]
            while lst:
                b0 = lst[0]
                if b0.fill < b0.cap:
                    return b0
                del lst[0]

    # -- placement -----------------------------------------------------------

    def _step(self, x, key: int) -> int:
        """Place one arrival; returns the cell index used."""
        self.t = t = self.t + 1
        mode = self.mode
        b = None
        if mode != MODE_FAILED:
            lst = self.keylists[key]
            while lst:
                b0 = lst[0]
                if b0.fill < b0.cap:
                    b = b0
                    break
                del lst[0]
            if b is None:
                if mode == MODE_PHASES:
                    b = self._resolve_overflow(key, t)
                else:  # MODE_FINAL
                    bb = self.backyard
                    if bb.fill < bb.cap:
                        b = bb
                    else:
                        self._mark_failed(t)
        if b is not None:
            cell = b.place(x, key)
            s = b.sub
            sf = self.subfills
            v = sf[s] + 1
            sf[s] = v
            if v == self.sublens[s]:
                self.sub_full_arrival[s] = t
        else:
            occ = self._occ
            p = self.low_ptr
            while occ[p]:
                p += 1
            self.low_ptr = p + 1
            cell = p
            self.failed_count += 1
        # direct write: buckets hand out distinct cells, the failed path scans
        if self._col is not None:
            self._col[cell] = x
        else:
            self._coords[cell] = x
        self._occ[cell] = 1
        self.arr._filled += 1
        return cell

    def key_of(self, x) -> int:
        # [x] is 1-D for scalars and (1, d) for point tuples, as fine_keys expects
        return self.domain.fine_keys(np.asarray([x], dtype=np.float64))[0]

    def run(self, xs) -> EngineResult:
        cfg = self.cfg
        pts = np.asarray(xs, dtype=np.float64)
        if cfg.d == 1:
            pts = pts.reshape(-1)
            if pts.shape != (cfg.n,):
                raise ValueError(f"expected {cfg.n} values, got shape {pts.shape}")
        else:
            if pts.shape != (cfg.n, cfg.d):
                raise ValueError(f"expected shape ({cfg.n}, {cfg.d}), got {pts.shape}")
        if not np.all((pts >= 0.0) & (pts <= 1.0)):
            raise ValueError("input coordinates must lie in [0, 1]")

        if self.mode == MODE_ARRIVAL:
            self._coords[:] = pts.reshape(self.cfg.n, self.cfg.d)
            self._occ[:] = b"\x01" * self.cfg.n
            self.arr._filled = self.cfg.n
            self.t = self.cfg.n
            return self._finish()

        keys = self.domain.fine_keys(pts)
        step = self._step
        if cfg.d == 1:
            for x, key in zip(pts.tolist(), keys):
                step(x, key)
        else:
            for x, key in zip(pts.tolist(), keys):
                step(x, key)
        return self._finish()

    def _finish(self) -> EngineResult:
        tr = self.trace
        tr.transitions = list(self.transitions)
        tr.failed_count = self.failed_count
        if self.mode != MODE_ARRIVAL:
            # phase records already live in the trace list
            tr.phases = self.phases
            for rec, full_at in zip(self.phases, self.sub_full_arrival):
                rec.full_arrival = full_at
            if self.backyard is not None:
                tr.backyard_fill = self.backyard.fill
            if tr.k == 0:
                tr.k = len(self.phases)
        return EngineResult(self.arr, tr)


# ------------------------------------------------------- spec-level wrappers --


def init_phase1(config: AlgorithmConfig, strategy=None, domain=None) -> Engine:
    """Fresh engine with phase 1 allocated (or arrival-order mode when d >= ell)."""
    return Engine(config, strategy=strategy, domain=domain)


def place(engine: Engine, x) -> int:
    """Single online arrival against an engine built by init_phase1."""
    if engine.mode == MODE_ARRIVAL:
        cell = engine.t
        engine.arr.write(cell, x)
        engine.t += 1
        return cell
    key = engine.key_of(x)
    return engine._step(x, key)


def run(config: AlgorithmConfig, xs, strategy=None, domain=None) -> EngineResult:
    """Feed the whole input sequence through a fresh engine."""
    return Engine(config, strategy=strategy, domain=domain).run(xs)
