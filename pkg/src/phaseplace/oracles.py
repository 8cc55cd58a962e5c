"""Offline baselines: exact small-instance shortest paths, a 2-opt heuristic,
block-restricted tours, and the asymptotic random-tour reference value.

All costs are open paths (no return edge), matching the placement objective,
which sums distances over consecutive cells only. Ratios measured against
tsp_path_heuristic are conservative: the heuristic upper-bounds the optimum,
so reported competitive ratios are lower bounds on the true ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, TooLarge

__all__ = [
    "OracleEstimate",
    "EXACT_LIMIT",
    "tsp_path_exact",
    "tsp_path_bruteforce",
    "tsp_path_heuristic",
    "heuristic_path",
    "block_tour_cost",
    "bhh_reference",
    "mu_bounds",
]

EXACT_LIMIT = 14        # 2^n * n^2 DP states; past this the DP is impractical
BRUTE_LIMIT = 8
PASS_CAP = 50           # 2-opt sweep limit; local optima arrive far earlier
_EPS = 1e-12


@dataclass(frozen=True)
class OracleEstimate:
    """A baseline cost with its provenance.

    kind is one of "exact" (true optimum), "heuristic_upper" (valid upper
    bound on the optimum), or "reference" (asymptotic formula, not a bound
    on any particular instance). applicable=False marks regimes where the
    formula is reported but should not be used as a baseline.
    """

    value: float
    kind: str
    n: int
    d: int
    applicable: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("oracle value must be nonnegative")
        if self.kind not in ("exact", "heuristic_upper", "reference"):
            raise ValueError(f"unknown oracle kind: {self.kind!r}")


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError(f"points must be (n,) or (n, d), got shape {pts.shape}")
    return np.ascontiguousarray(pts)


def _pairwise(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def path_cost(pts: np.ndarray, order) -> float:
    seq = pts[np.asarray(order, dtype=np.intp)]
    return float(np.sqrt(((seq[1:] - seq[:-1]) ** 2).sum(axis=1)).sum())


def tsp_path_exact(points) -> OracleEstimate:
    """Minimum open-path cost by Held-Karp over subsets with free endpoints."""
    pts = _as_points(points)
    n, d = pts.shape
    if n == 0:
        raise EmptyInput("no points")
    if n > EXACT_LIMIT:
        raise TooLarge(f"exact DP limited to n <= {EXACT_LIMIT}, got {n}")
    if n == 1:
        return OracleEstimate(0.0, "exact", 1, d)
    dist = _pairwise(pts)
    full = 1 << n
    dp = np.full((full, n), np.inf)
    for j in range(n):
        dp[1 << j, j] = 0.0
    for s in range(1, full):
        row = dp[s]
        if not np.isfinite(row).any():
            continue
        free = [k for k in range(n) if not (s >> k) & 1]
        for k in free:
            val = (row + dist[:, k]).min()
            t = s | (1 << k)
            if val < dp[t, k]:
                dp[t, k] = val
    return OracleEstimate(float(dp[full - 1].min()), "exact", n, d)


def tsp_path_bruteforce(points) -> OracleEstimate:
    """Independent oracle: minimum over all n! orders, for n <= 8 only."""
    from itertools import permutations

    pts = _as_points(points)
    n, d = pts.shape
    if n == 0:
        raise EmptyInput("no points")
    if n > BRUTE_LIMIT:
        raise TooLarge(f"brute force limited to n <= {BRUTE_LIMIT}, got {n}")
    if n == 1:
        return OracleEstimate(0.0, "exact", 1, d)
    perms = np.array(list(permutations(range(n))), dtype=np.intp)
    seq = pts[perms]
    costs = np.sqrt(((seq[:, 1:] - seq[:, :-1]) ** 2).sum(axis=2)).sum(axis=1)
    return OracleEstimate(float(costs.min()), "exact", n, d)


# ------------------------------------------------------------- heuristic --


def _nn_order(pts: np.ndarray) -> list:
    """Nearest-neighbor chain from point 0; deterministic."""
    n = len(pts)
    if n <= 2048:
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        visited = np.zeros(n, dtype=bool)
        order = [0]
        visited[0] = True
        cur = 0
        for _ in range(n - 1):
            row = d2[cur].copy()
            row[visited] = np.inf
            cur = int(row.argmin())
            visited[cur] = True
            order.append(cur)
        return order
    tree = cKDTree(pts)
    visited = np.zeros(n, dtype=bool)
    order = [0]
    visited[0] = True
    cur = 0
    for _ in range(n - 1):
        kk = 8
        nxt = -1
        while nxt < 0:
            kk = min(kk, n)
            _, idx = tree.query(pts[cur], k=kk)
            for cand in np.atleast_1d(idx):
                if not visited[cand]:
                    nxt = int(cand)
                    break
            if nxt < 0:
                if kk == n:
                    raise AssertionError("no unvisited point found")
                kk *= 4
        visited[nxt] = True
        order.append(nxt)
        cur = nxt
    return order


def _neighbor_lists(pts: np.ndarray, k: int) -> list:
    """Per-point candidate lists, nearest first, self excluded."""
    n = len(pts)
    if n <= 256:
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        idx = np.argsort(d2, axis=1, kind="stable")[:, : n - 1]
        return [row.tolist() for row in idx]
    kk = min(k + 1, n)
    tree = cKDTree(pts)
    _, idx = tree.query(pts, k=kk)
    out = []
    for a in range(n):
        out.append([int(c) for c in idx[a] if c != a][:k])
    return out


def _two_opt(pts: np.ndarray, tour: list, cand: list):
    """First-improvement 2-opt on an open path, with don't-look bits.

    Moves considered for each candidate pair (a, c): reverse the span between
    them on either side, which covers internal reversals and, when a span
    touches an end of the path, the cheaper endpoint reversals that cut a
    single edge. Returns (tour, passes, applied_moves).
    """
    n = len(tour)
    p = pts.tolist()
    dist = math.dist
    pos = [0] * n
    for i, c in enumerate(tour):
        pos[c] = i
    dont = bytearray(n)
    moves = 0
    passes = 0

    def try_city(a: int) -> bool:
        nonlocal moves
        i = pos[a]
        for c in cand[a]:
            j = pos[c]
            if i < j:
                lo, hi = i, j
            elif j < i:
                lo, hi = j, i
            else:
                continue
            tl = tour[lo]
            th = tour[hi]
            ptl = p[tl]
            pth = p[th]
            d_new = dist(ptl, pth)
            # reverse (lo, hi]: new edge (tl, th); cuts one edge if hi is the end
            nxt = tour[lo + 1]
            if hi == n - 1:
                g = dist(ptl, p[nxt]) - d_new
            else:
                after = tour[hi + 1]
                g = (dist(ptl, p[nxt]) + dist(pth, p[after])
                     - d_new - dist(p[nxt], p[after]))
            if g > _EPS:
                touched = (tl, th, nxt, tour[hi + 1] if hi < n - 1 else th)
                tour[lo + 1: hi + 1] = tour[lo + 1: hi + 1][::-1]
                for q in range(lo + 1, hi + 1):
                    pos[tour[q]] = q
                for q in touched:
                    dont[q] = 0
                moves += 1
                return True
            # reverse [lo, hi): new edge (tl, th) on the other side
            prv = tour[hi - 1]
            if lo == 0:
                g = dist(p[prv], pth) - d_new
            else:
                before = tour[lo - 1]
                g = (dist(p[before], ptl) + dist(p[prv], pth)
                     - dist(p[before], p[prv]) - d_new)
            if g > _EPS:
                touched = (tl, th, prv, tour[lo - 1] if lo > 0 else tl)
                tour[lo: hi] = tour[lo: hi][::-1]
                for q in range(lo, hi):
                    pos[tour[q]] = q
                for q in touched:
                    dont[q] = 0
                moves += 1
                return True
        return False

    while passes < PASS_CAP:
        passes += 1
        improved_any = False
        for a in range(n):
            if dont[a]:
                continue
            if try_city(a):
                improved_any = True
            else:
                dont[a] = 1
        if not improved_any:
            break
    return tour, passes, moves


def _polish(pts: np.ndarray):
    n = len(pts)
    if n == 1:
        return 0.0, [0], 0, 0
    order = _nn_order(pts)
    k = (n - 1) if n <= 256 else 10
    cand = _neighbor_lists(pts, k)
    order, passes, moves = _two_opt(pts, order, cand)
    return path_cost(pts, order), order, passes, moves


def heuristic_path(points):
    """(cost, visiting order) from nearest-neighbor + 2-opt; deterministic."""
    pts = _as_points(points)
    if len(pts) == 0:
        raise EmptyInput("no points")
    cost, order, _, _ = _polish(pts)
    return cost, order


def tsp_path_heuristic(points) -> OracleEstimate:
    """Nearest-neighbor chain polished by first-improvement 2-opt.

    Always an upper bound on the optimum; deterministic given input order.
    Large instances restrict 2-opt to the 10 nearest neighbors of each point.
    """
    pts = _as_points(points)
    n, d = pts.shape
    if n == 0:
        raise EmptyInput("no points")
    cost, order, passes, moves = _polish(pts)
    return OracleEstimate(
        cost, "heuristic_upper", n, d,
        meta={"method": "nn+2opt", "passes": passes, "moves": moves},
    )


# ------------------------------------------------------------ block tours --


def block_tour_cost(points, partition) -> OracleEstimate:
    """Upper bound on the best tour that exhausts one block before the next.

    Visits nonempty blocks in serpentine order; inside each block the points
    follow this module's heuristic path, and consecutive blocks connect by a
    single edge from the fixed exit point to whichever endpoint of the next
    block's path is closer (greedy entry; the path flips if its far end wins).
    """
    pts = _as_points(points)
    n, d = pts.shape
    if n == 0:
        raise EmptyInput("no points")
    if d != partition.d:
        raise ValueError(f"points have d={d}, partition has d={partition.d}")
    sides = partition.sides
    flat = np.zeros(n, dtype=np.int64)
    for i, (ni, stride) in enumerate(zip(sides, partition._strides)):
        vi = np.ceil(pts[:, i] * ni)
        np.clip(vi, 1, ni, out=vi)
        flat += (vi.astype(np.int64) - 1) * stride
    ranks = partition.order_array()[flat]
    by_rank = np.argsort(ranks, kind="stable")
    sorted_ranks = ranks[by_rank]
    cut = np.flatnonzero(np.diff(sorted_ranks)) + 1
    groups = np.split(by_rank, cut)

    total = 0.0
    exit_pt = None
    nonempty = 0
    for idxs in groups:
        nonempty += 1
        sub = pts[idxs]
        cost_b, order_b = heuristic_path(sub)
        head = sub[order_b[0]]
        tail = sub[order_b[-1]]
        if exit_pt is None:
            total += cost_b
            exit_pt = tail
            continue
        d_head = float(np.sqrt(((exit_pt - head) ** 2).sum()))
        d_tail = float(np.sqrt(((exit_pt - tail) ** 2).sum()))
        if d_tail < d_head:
            total += d_tail + cost_b
            exit_pt = head
        else:
            total += d_head + cost_b
            exit_pt = tail
    return OracleEstimate(
        total, "heuristic_upper", n, d, meta={"nonempty_blocks": nonempty},
    )


# ------------------------------------------------------------- references --


def bhh_reference(n: int, d: int) -> OracleEstimate:
    """Asymptotic expected shortest-tour length sqrt(d/(2*pi*e)) * n^(1-1/d)
    for n uniform points in the unit cube. Reference only; flagged
    not-applicable for d = 1, where the exact optimum is the value span."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    beta = math.sqrt(d / (2.0 * math.pi * math.e))
    value = beta * n ** (1.0 - 1.0 / d)
    return OracleEstimate(
        value, "reference", n, d, applicable=(d >= 2), meta={"beta": beta},
    )


def mu_bounds(d: int) -> tuple:
    """(lower, upper) bounds on the mean distance coefficient mu_d of the
    arrival-order tour: sqrt(d)/3 <= mu_d <= sqrt(d/6)."""
    if d < 1:
        raise ValueError("need d >= 1")
    return (math.sqrt(d) / 3.0, math.sqrt(d / 6.0))
