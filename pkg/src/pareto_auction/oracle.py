"""Brute-force ground truth by exhaustive enumeration of feasible mechanisms.

Two enumeration routes exist and are cross-checked by the tests:

* the generic route assigns winners cell by cell in row-major order, forcing
  a cell whenever a lower neighbour along some bidder's axis is already won
  by that bidder; it yields exactly the matrices that pass ``is_monotone``;
* the two-bidder route parametrizes a matrix by per-column row thresholds
  for bidder 1 and per-row column thresholds for bidder 2 and keeps the
  compatible pairs. It is vectorized with numpy so that 5x5 instances
  (918530 mechanisms) stay cheap.

Objective values on the vectorized route are computed with integers scaled
by a common denominator and converted back to exact fractions.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import errors
from .model import (
    AllocationMatrix,
    Instance,
    ObjectivePoint,
    ParetoSet,
    evaluate,
    make_mechanism,
    pareto_filter,
)

GENERIC_LIMIT = 16
PAIR_LIMIT = 6
_CACHE_MAX_MECHANISMS = 2_000_000


def _check_limits(inst: Instance, generic_limit: int, pair_limit: int) -> None:
    if inst.n == 2:
        if max(inst.shape) > pair_limit:
            raise errors.LimitExceeded(f"support sizes {inst.shape} exceed {pair_limit}")
    elif math.prod(inst.shape) > generic_limit:
        raise errors.LimitExceeded(f"{math.prod(inst.shape)} tuples exceed {generic_limit}")


# ---------------------------------------------------------------------------
# generic enumeration


def enumerate_generic(shape: tuple[int, ...]) -> Iterator[AllocationMatrix]:
    """All monotone matrices of the given shape, any number of bidders."""
    shape = tuple(shape)
    n = len(shape)
    cells = list(itertools.product(*(range(h) for h in shape)))
    strides = AllocationMatrix.zeros(shape).strides
    winners = [0] * len(cells)

    def options(pos: int, idx: tuple[int, ...]) -> tuple[int, ...]:
        forced = {b + 1 for b in range(n) if idx[b] > 0 and winners[pos - strides[b]] == b + 1}
        if len(forced) > 1:
            return ()
        if forced:
            return tuple(forced)
        return tuple(range(n + 1))

    def rec(pos: int):
        if pos == len(cells):
            yield AllocationMatrix(shape, tuple(winners))
            return
        for w in options(pos, cells[pos]):
            winners[pos] = w
            yield from rec(pos + 1)
        winners[pos] = 0

    yield from rec(0)


def enumerate_bruteforce(shape: tuple[int, ...]) -> Iterator[AllocationMatrix]:
    """Filter all ``(n+1)^(prod h)`` matrices by monotonicity; tiny shapes only."""
    from .model import MarginalDistribution, is_monotone

    n = len(shape)
    dummy = Instance(tuple(MarginalDistribution(tuple(range(1, h + 1)), (Fraction(1, h),) * h) for h in shape))
    for winners in itertools.product(range(n + 1), repeat=math.prod(shape)):
        a = AllocationMatrix(shape, winners)
        if is_monotone(a, dummy):
            yield a


# ---------------------------------------------------------------------------
# two-bidder threshold-pair enumeration


def _pair_chunks(h1: int, h2: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(winners, t1, t2)`` blocks, one per bidder-1 threshold vector.

    ``winners`` has shape (N, h1, h2); ``t1`` (N, h2) holds bidder 1's row
    threshold per column and ``t2`` (N, h1) bidder 2's column threshold per
    row, with ``h1``/``h2`` meaning "never".
    """
    rows = np.arange(h1)[:, None]
    cols = np.arange(h2)[None, :]
    for t1 in itertools.product(range(h1 + 1), repeat=h2):
        t1a = np.asarray(t1)
        own1 = rows >= t1a[None, :]
        # bidder 2's threshold in row i must lie right of bidder 1's last cell
        lo = [(np.flatnonzero(own1[i]).max() + 1) if own1[i].any() else 0 for i in range(h1)]
        choices = [np.arange(lo[i], h2 + 1) for i in range(h1)]
        grids = np.meshgrid(*choices, indexing="ij") if h1 else []
        t2 = np.stack([g.ravel() for g in grids], axis=1)
        count = t2.shape[0]
        own2 = cols[None, :, :] >= t2[:, :, None]
        win = np.where(own1[None, :, :], 1, np.where(own2, 2, 0)).astype(np.int8)
        yield win, np.broadcast_to(t1a, (count, h2)), t2


@lru_cache(maxsize=8)
def _pair_arrays(h1: int, h2: int):
    chunks = list(_pair_chunks(h1, h2))
    win = np.concatenate([c[0] for c in chunks])
    t1 = np.concatenate([np.asarray(c[1]) for c in chunks])
    t2 = np.concatenate([c[2] for c in chunks])
    for arr in (win, t1, t2):
        arr.flags.writeable = False
    return win, t1, t2


def count_pair_mechanisms(h1: int, h2: int) -> int:
    """Closed-form count of compatible threshold pairs (no materialization)."""
    total = 0
    for t1 in itertools.product(range(h1 + 1), repeat=h2):
        prod = 1
        for i in range(h1):
            last = max((j + 1 for j in range(h2) if t1[j] <= i), default=0)
            prod *= h2 + 1 - last
        total += prod
    return total


def _pair_blocks(h1: int, h2: int):
    if count_pair_mechanisms(h1, h2) <= _CACHE_MAX_MECHANISMS:
        yield _pair_arrays(h1, h2)
    else:
        yield from _pair_chunks(h1, h2)


def enumerate_pairs(shape: tuple[int, int]) -> Iterator[AllocationMatrix]:
    h1, h2 = shape
    for win, _, _ in _pair_blocks(h1, h2):
        for row in win.reshape(win.shape[0], -1):
            yield AllocationMatrix((h1, h2), tuple(row.tolist()))


def enumerate_feasible(
    inst: Instance, *, generic_limit: int = GENERIC_LIMIT, pair_limit: int = PAIR_LIMIT
) -> Iterator[AllocationMatrix]:
    """Every feasible allocation matrix of ``inst`` exactly once."""
    _check_limits(inst, generic_limit, pair_limit)
    if inst.n == 2:
        return enumerate_pairs(inst.shape)
    return enumerate_generic(inst.shape)


def count_feasible(inst: Instance, **limits) -> int:
    if inst.n == 2:
        _check_limits(inst, limits.get("generic_limit", GENERIC_LIMIT), limits.get("pair_limit", PAIR_LIMIT))
        return count_pair_mechanisms(*inst.shape)
    return sum(1 for _ in enumerate_feasible(inst, **limits))


# ---------------------------------------------------------------------------
# vectorized evaluation (two bidders)


class _ScaledTables:
    """Integer tables ``mass * value`` over a common denominator ``D``."""

    def __init__(self, inst: Instance):
        h1, h2 = inst.shape
        v1, v2 = inst.marginals[0].values, inst.marginals[1].values
        mass = [[inst.mass((i, j)) for j in range(h2)] for i in range(h1)]
        dm = math.lcm(*[m.denominator for row in mass for m in row])
        dv = math.lcm(*[v.denominator for v in v1 + v2])
        self.D = dm * dv
        bound = sum(abs(x) for x in v1 + v2) * self.D * h1 * h2 + 1
        dtype = np.int64 if bound < 2**62 else object
        self.mass = np.array([[int(m * dm) for m in row] for row in mass], dtype=dtype)
        self.v1 = np.array([int(v * dv) for v in v1], dtype=dtype)
        self.v2 = np.array([int(v * dv) for v in v2], dtype=dtype)
        self.dtype = dtype

    def evaluate(self, win: np.ndarray, t1: np.ndarray, t2: np.ndarray):
        """Scaled welfare and revenue arrays for a block of mechanisms."""
        h1, h2 = self.mass.shape
        is1 = win == 1
        is2 = win == 2
        val1 = self.v1[:, None]  # (h1, 1) value of bidder 1 at the cell's row
        val2 = self.v2[None, :]
        welfare_cell = np.where(is1, val1, 0) + np.where(is2, val2, 0)
        v1pad = np.concatenate([self.v1, np.zeros(1, dtype=self.v1.dtype)])
        v2pad = np.concatenate([self.v2, np.zeros(1, dtype=self.v2.dtype)])
        pay1 = v1pad[np.asarray(t1)][:, None, :]  # bidder 1 pays its column threshold
        pay2 = v2pad[np.asarray(t2)][:, :, None]  # bidder 2 pays its row threshold
        pay_cell = np.where(is1, pay1, 0) + np.where(is2, pay2, 0)
        welfare = (welfare_cell * self.mass).reshape(win.shape[0], -1).sum(axis=1)
        revenue = (pay_cell * self.mass).reshape(win.shape[0], -1).sum(axis=1)
        return welfare, revenue


def _frac(x: int, D: int) -> Fraction:
    return Fraction(int(x), D)


def objective_cloud(inst: Instance, **limits) -> list[tuple[ObjectivePoint, int]]:
    """(point, mechanism id) for every feasible mechanism, ids in enumeration order."""
    _check_limits(inst, limits.get("generic_limit", GENERIC_LIMIT), limits.get("pair_limit", PAIR_LIMIT))
    if inst.n != 2:
        return [(evaluate(a, inst), k) for k, a in enumerate(enumerate_generic(inst.shape))]
    tables = _ScaledTables(inst)
    out = []
    offset = 0
    for win, t1, t2 in _pair_blocks(*inst.shape):
        w, r = tables.evaluate(win, t1, t2)
        out.extend(
            (ObjectivePoint(_frac(a, tables.D), _frac(b, tables.D)), offset + k)
            for k, (a, b) in enumerate(zip(w.tolist(), r.tolist()))
        )
        offset += win.shape[0]
    return out


def objective_value_sets(inst: Instance, **limits) -> tuple[set, set, set]:
    """Distinct welfare values, revenue values and (welfare, revenue) pairs."""
    _check_limits(inst, limits.get("generic_limit", GENERIC_LIMIT), limits.get("pair_limit", PAIR_LIMIT))
    if inst.n != 2:
        pts = [p for p, _ in objective_cloud(inst, **limits)]
        return {p.welfare for p in pts}, {p.revenue for p in pts}, set(pts)
    tables = _ScaledTables(inst)
    pairs: set[tuple[int, int]] = set()
    for win, t1, t2 in _pair_blocks(*inst.shape):
        w, r = tables.evaluate(win, t1, t2)
        pairs.update(zip(w.tolist(), r.tolist()))
    D = tables.D
    joint = {ObjectivePoint(_frac(a, D), _frac(b, D)) for a, b in pairs}
    return {p.welfare for p in joint}, {p.revenue for p in joint}, joint


def mechanism_by_id(inst: Instance, mech_id: int, **limits):
    """Materialize the mechanism with the given enumeration id."""
    if inst.n == 2:
        h1, h2 = inst.shape
        offset = 0
        for win, _, _ in _pair_blocks(h1, h2):
            if mech_id < offset + win.shape[0]:
                row = win[mech_id - offset].ravel().tolist()
                return make_mechanism(AllocationMatrix((h1, h2), tuple(row)), inst)
            offset += win.shape[0]
        raise IndexError(mech_id)
    for k, a in enumerate(enumerate_feasible(inst, **limits)):
        if k == mech_id:
            return make_mechanism(a, inst)
    raise IndexError(mech_id)


def _staircase_ints(w: np.ndarray, r: np.ndarray, ids: np.ndarray):
    """Indices of the undominated entries of integer arrays (lowest id on ties)."""
    order = np.lexsort((ids, -r, -w)) if w.dtype != object else sorted(
        range(len(w)), key=lambda k: (-w[k], -r[k], ids[k])
    )
    keep = []
    best = None
    for k in order:
        rv = r[k]
        if best is None or rv > best:
            keep.append(k)
            best = rv
    return keep


def oracle_pareto(inst: Instance, **limits) -> ParetoSet:
    """Exact Pareto set over all feasible mechanisms; handles are enumeration ids."""
    _check_limits(inst, limits.get("generic_limit", GENERIC_LIMIT), limits.get("pair_limit", PAIR_LIMIT))
    if inst.n != 2:
        return pareto_filter(objective_cloud(inst, **limits))
    tables = _ScaledTables(inst)
    cand_w, cand_r, cand_id = [], [], []
    offset = 0
    for win, t1, t2 in _pair_blocks(*inst.shape):
        w, r = tables.evaluate(win, t1, t2)
        ids = np.arange(offset, offset + win.shape[0])
        keep = _staircase_ints(w, r, ids)
        cand_w.extend(w[keep].tolist())
        cand_r.extend(r[keep].tolist())
        cand_id.extend(ids[keep].tolist())
        offset += win.shape[0]
    D = tables.D
    return pareto_filter(
        (ObjectivePoint(_frac(a, D), _frac(b, D)), k) for a, b, k in zip(cand_w, cand_r, cand_id)
    )


def max_objective(inst: Instance, lam: Fraction | None = None, which: str = "welfare", **limits) -> Fraction:
    """Maximum welfare, revenue, or ``revenue + lam * welfare`` over all feasible mechanisms."""
    best = None
    for p, _ in objective_cloud(inst, **limits):
        if which == "welfare":
            v = p.welfare
        elif which == "revenue":
            v = p.revenue
        else:
            v = p.revenue + Fraction(lam) * p.welfare
        if best is None or v > best:
            best = v
    return best


def upper_hull(points) -> list[ObjectivePoint]:
    """Vertices of the upper concave envelope of a point cloud, welfare ascending."""
    pts = sorted(set(ObjectivePoint(*p) for p in points))
    hull: list[ObjectivePoint] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == p[0]:
            hull.pop()
        hull.append(p)
    return hull


def hull_revenue_at(hull: list[ObjectivePoint], welfare: Fraction) -> Fraction:
    """Envelope height (max randomized revenue) at ``welfare``."""
    welfare = Fraction(welfare)
    for a, b in zip(hull, hull[1:]):
        if a.welfare <= welfare <= b.welfare:
            t = (welfare - a.welfare) / (b.welfare - a.welfare)
            return a.revenue + t * (b.revenue - a.revenue)
    if hull and hull[-1].welfare == welfare:
        return hull[-1].revenue
    raise ValueError("welfare outside the hull's range")


def nonconvexity_witness(pareto: ParetoSet):
    """Find Pareto points p, q, r and a weight t with t*p + (1-t)*r > q strictly.

    Returns ``(p, q, r, t)`` or ``None`` when the Pareto set is convex.
    """
    pts = list(pareto.points)
    for qi in range(1, len(pts) - 1):
        q = pts[qi]
        for p in pts[:qi]:
            for r in pts[qi + 1 :]:
                # chord height at q's welfare
                s = (q.welfare - p.welfare) / (r.welfare - p.welfare)
                chord = p.revenue + s * (r.revenue - p.revenue)
                if chord <= q.revenue:
                    continue
                # slide right along the chord while staying above q's revenue
                slope = (p.revenue - r.revenue) / (r.welfare - p.welfare)
                room = (chord - q.revenue) / 2 / slope if slope > 0 else (r.welfare - q.welfare) / 2
                dx = min(room, (r.welfare - q.welfare) / 2)
                x = q.welfare + dx
                t = (r.welfare - x) / (r.welfare - p.welfare)
                return p, q, r, t
    return None


def single_bidder_curve(inst: Instance):
    """All ``h + 1`` posted-price mechanisms of a single bidder and a convexity flag.

    Price index ``h`` means no sale. The flag reports whether the Pareto
    subset is convex: no Pareto point lies strictly below the chord of its
    neighbours.
    """
    if inst.n != 1:
        raise errors.ArityError("single_bidder_curve needs exactly one bidder")
    m = inst.marginals[0]
    h = m.size
    pts = []
    for t in range(h + 1):
        a = AllocationMatrix((h,), tuple(1 if k >= t else 0 for k in range(h)))
        pts.append((t, evaluate(a, inst)))
    front = pareto_filter((p, t) for t, p in pts).points
    convex = True
    for a, b, c in zip(front, front[1:], front[2:]):
        # b below chord ac  <=>  cross product has the wrong sign
        if (b.welfare - a.welfare) * (c.revenue - a.revenue) - (b.revenue - a.revenue) * (c.welfare - a.welfare) > 0:
            convex = False
    return pts, convex
