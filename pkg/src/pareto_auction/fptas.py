"""GAP routine and epsilon-Pareto sets for two bidders.

Both run a *staircase* version of the joint dynamic program: welfare
contributions are floored to a grid and the running welfare count is
saturated at a cap, and each subproblem keeps, per welfare count, only the
largest revenue reached. Dropping dominated pairs never changes the answer
to "does some achievable pair dominate b?", so the staircase answers the
same questions as the full pair set with at most ``cap + 1`` states per
subproblem.

Flooring only under-counts, and a decomposition path adds at most
``h1 + h2`` contributions, so a mechanism loses less than ``(h1 + h2)``
grid steps per coordinate. With grid ``delta * W0 / (4 (h1 + h2))`` that is
a quarter of the slack the GAP answer is allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from . import errors
from .exact_dp import ContributionTables, _floor_units, apply_peel, contribution_tables
from .model import (
    AllocationMatrix,
    Instance,
    Mechanism,
    ObjectivePoint,
    make_mechanism,
    pareto_filter,
    to_fraction,
)


@dataclass(frozen=True)
class GapQuery:
    bound: ObjectivePoint
    delta: Fraction

    def __post_init__(self):
        w0, r0 = (to_fraction(x) for x in self.bound)
        delta = to_fraction(self.delta)
        if w0 <= 0 or r0 <= 0:
            raise errors.NonPositiveBound("GAP bounds must be positive")
        if delta <= 0:
            raise errors.NonPositiveDelta("delta must be positive")
        object.__setattr__(self, "bound", ObjectivePoint(w0, r0))
        object.__setattr__(self, "delta", delta)


@dataclass(frozen=True)
class NoCertificate:
    """No mechanism beats ``(1 + delta) * bound`` in both coordinates."""

    query: GapQuery


GapAnswer = Mechanism | NoCertificate


class StaircaseDP:
    """Per-subproblem array ``best[w]``: max revenue count at saturated welfare count ``w``.

    ``gamma_r=None`` keeps revenue exact (in units of ``1/D``).
    """

    def __init__(self, tables: ContributionTables, gamma_w: Fraction, cap: int, gamma_r: Fraction | None = None):
        self.tables = tables
        self.gamma_w = gamma_w
        self.gamma_r = gamma_r
        self.cap = cap
        t = tables

        def rw(x):
            return _floor_units(x, t.D, gamma_w)

        def rr(x):
            return x if gamma_r is None else _floor_units(x, t.D, gamma_r)

        self.cw1 = [[rw(x) for x in row] for row in t.w1]
        self.cw2 = [[rw(x) for x in row] for row in t.w2]
        self.cr1 = [[rr(x) for x in row] for row in t.r1]
        self.cr2 = [[rr(x) for x in row] for row in t.r2]
        rev_bound = sum(sum(row) for row in self.cr1) + sum(sum(row) for row in self.cr2)
        self.dtype = np.int64 if rev_bound < 2**62 else object
        self.cells: dict[tuple[int, int], tuple[np.ndarray, ...]] = {}
        self._run()

    def _base(self):
        best = np.full(self.cap + 1, -1, dtype=self.dtype)
        best[0] = 0
        return best, None, None, None, None

    def _shift(self, prev: np.ndarray, a: int, b: int):
        cap = self.cap
        cand = np.full(cap + 1, -1, dtype=self.dtype)
        pred = np.full(cap + 1, -1, dtype=np.int64)
        if a < cap:
            cand[a:cap] = prev[: cap - a]
            pred[a:cap] = np.arange(cap - a)
        lo = max(cap - a, 0)
        tail = prev[lo:]
        pos = int(np.argmax(tail))
        cand[cap] = tail[pos]
        pred[cap] = lo + pos
        reach = cand >= 0
        cand[reach] = cand[reach] + b
        return cand, pred

    def _run(self) -> None:
        t = self.tables
        h1, h2 = t.h1, t.h2
        for i in range(h1 + 1):
            self.cells[(i, h2)] = self._base()
        for j in range(h2 + 1):
            self.cells[(h1, j)] = self._base()
        cw1, cw2, cr1, cr2 = self.cw1, self.cw2, self.cr1, self.cr2
        for s in range(h1 + h2 - 2, -1, -1):
            for i in range(max(0, s - h2 + 1), min(h1 - 1, s) + 1):
                j = s - i
                best = np.full(self.cap + 1, -1, dtype=self.dtype)
                term = np.zeros(self.cap + 1, dtype=np.int8)
                ks = np.zeros(self.cap + 1, dtype=np.int16)
                ls = np.zeros(self.cap + 1, dtype=np.int16)
                preds = np.zeros(self.cap + 1, dtype=np.int64)

                def offer(prev, a, b, tm, k, l):
                    cand, pred = self._shift(prev, a, b)
                    better = cand > best
                    if better.any():
                        best[better] = cand[better]
                        term[better] = tm
                        ks[better] = k
                        ls[better] = l
                        preds[better] = pred[better]

                below = self.cells[(i + 1, j)][0]
                for k in range(j, h2 + 1):
                    offer(below, cw2[i][k], cr2[i][k], 1, k, 0)
                right = self.cells[(i, j + 1)][0]
                for k in range(i, h1 + 1):
                    offer(right, cw1[k][j], cr1[k][j], 2, k, 0)
                diag = self.cells[(i + 1, j + 1)][0]
                for k in range(i + 1, h1 + 1):
                    for l in range(j + 1, h2 + 1):
                        offer(diag, cw1[k][j] + cw2[i][l], cr1[k][j] + cr2[i][l], 3, k, l)
                self.cells[(i, j)] = (best, term, ks, ls, preds)

    @property
    def root(self) -> np.ndarray:
        return self.cells[(0, 0)][0]

    def witness(self, w_index: int) -> AllocationMatrix:
        t = self.tables
        grid = [[0] * t.h2 for _ in range(t.h1)]
        i, j, w = 0, 0, w_index
        while i < t.h1 and j < t.h2:
            _, term, ks, ls, preds = self.cells[(i, j)]
            tm, k, l, p = int(term[w]), int(ks[w]), int(ls[w]), int(preds[w])
            i, j = apply_peel(grid, i, j, tm, k, l)
            w = p
        return AllocationMatrix((t.h1, t.h2), tuple(x for row in grid for x in row))


def _require_two(inst: Instance) -> None:
    if inst.n != 2:
        raise errors.ArityError("the FPTAS handles exactly two bidders")


def gap_query(inst: Instance, bound: Any, delta: Any, tables: ContributionTables | None = None) -> GapAnswer:
    """Return a mechanism dominating ``bound`` or certify that none beats ``(1+delta) * bound``."""
    _require_two(inst)
    q = GapQuery(ObjectivePoint(*bound), delta)
    t = tables if tables is not None else contribution_tables(inst)
    steps = t.h1 + t.h2
    w0, r0 = q.bound
    gw = q.delta * w0 / (4 * steps)
    gr = q.delta * r0 / (4 * steps)
    cap = math.ceil(w0 / gw)
    need_r = math.ceil(r0 / gr)
    dp = StaircaseDP(t, gw, cap, gr)
    best = dp.root
    if best[cap] >= need_r:
        mech = make_mechanism(dp.witness(cap), inst)
        if not mech.objectives.dominates(q.bound):  # pragma: no cover - floor rounding under-counts
            raise AssertionError("rounded witness does not dominate its bound")
        return mech
    # the rounded state fell short; states within the rounding loss may still
    # dominate in exact arithmetic
    lo_w = max(0, math.ceil(w0 / gw) - steps)
    for w in range(cap, lo_w - 1, -1):
        r = best[w]
        if r < 0 or (r + steps) * gr < r0:
            continue
        mech = make_mechanism(dp.witness(w), inst)
        if mech.objectives.dominates(q.bound):
            return mech
    return NoCertificate(q)


def _objective_unit(t: ContributionTables) -> Fraction:
    return Fraction(1, t.D)


def eps_pareto(inst: Instance, eps: Any) -> list[tuple[Mechanism, ObjectivePoint]]:
    """An eps-Pareto set: every feasible point is eps-covered by a returned point.

    The GAP queries on the welfare grid ``L * (1 + eps/4)^t`` are answered in
    batches: one staircase run per welfare octave ``[B, 2B)`` with a grid of
    ``delta * B / (4 (h1 + h2))`` serves every grid point of the octave,
    reporting the largest exact revenue among states whose rounded welfare
    clears the grid point. Returned points are mutually undominated and
    sorted by welfare.
    """
    _require_two(inst)
    eps = to_fraction(eps)
    if eps <= 0:
        raise errors.NonPositiveEps("eps must be positive")
    t = contribution_tables(inst)
    steps = t.h1 + t.h2
    delta = eps / 4
    ratio = 1 + eps / 4
    upper = inst.max_welfare_bound()
    lower = _objective_unit(t) / 2
    found: dict[tuple[int, int], Mechanism] = {}
    base = lower
    grid_point = lower
    octave = 0
    while base <= upper:
        gw = delta * base / (4 * steps)
        cap = math.ceil(2 * base / gw)
        dp = StaircaseDP(t, gw, cap)
        best = dp.root
        # suffix argmax: best revenue among welfare counts >= index
        suffix_arg = np.empty(cap + 1, dtype=np.int64)
        arg = cap
        for w in range(cap, -1, -1):
            if best[w] > best[arg]:
                arg = w
            suffix_arg[w] = arg
        while grid_point < 2 * base and grid_point <= upper:
            idx = math.ceil(grid_point / gw)
            w = int(suffix_arg[idx])
            if best[w] >= 0 and (octave, w) not in found:
                found[(octave, w)] = make_mechanism(dp.witness(w), inst)
            grid_point *= ratio
        base *= 2
        octave += 1
    mechs = list(found.values())
    front = pareto_filter((m.objectives, k) for k, m in enumerate(mechs))
    return [(mechs[k], p) for p, k in front]


def eps_pareto_size_bound(inst: Instance, eps: Any) -> float:
    """``4 (1/eps) ln(U D)`` with ``U`` the welfare upper bound and ``1/D`` the objective unit."""
    t = contribution_tables(inst)
    eps = to_fraction(eps)
    return float(4 / eps) * math.log(float(inst.max_welfare_bound() * t.D))
