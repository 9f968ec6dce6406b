"""Pseudo-polynomial dynamic program over two-bidder allocation matrices.

A subproblem ``(i, j)`` is the allocation of the sub-matrix with rows
``i..h1-1`` (bidder 1's values from index ``i`` up) and columns
``j..h2-1``. Monotonicity forbids bidder 1 owning a cell of row ``i`` while
bidder 2 owns a cell of column ``j``, so every feasible sub-matrix can be
peeled in one of three ways:

* T1: row ``i`` has no bidder-1 cell; it is a bidder-2 posted price at
  column ``k`` (``k == h2`` means no sale in that row); recurse on
  ``(i + 1, j)``;
* T2: column ``j`` has no bidder-2 cell; it is a bidder-1 posted price at
  row ``k``; recurse on ``(i, j + 1)``;
* T3: both, with thresholds strictly past the corner; recurse on
  ``(i + 1, j + 1)``.

Each peel adds the posted-price contribution of the peeled line (welfare
and revenue are both non-negative sums over the joint masses), so values
are accumulated unnormalized as integers over a common denominator ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import errors
from .model import AllocationMatrix, Instance, Mechanism, ObjectivePoint, make_mechanism, to_fraction

OBJECTIVES = ("welfare", "revenue", "joint")


def _require_two(inst: Instance) -> None:
    if inst.n != 2:
        raise errors.ArityError("the dynamic program handles exactly two bidders")


@dataclass(frozen=True)
class ContributionTables:
    """Scaled posted-price contributions, sentinel index included.

    ``w1[k][j]``/``r1[k][j]``: welfare/revenue from column ``j`` when bidder 1
    is offered price ``v1[k]`` there; ``w2[i][k]``/``r2[i][k]`` likewise for
    row ``i`` and bidder 2. All tables are ``(h1 + 1) x (h2 + 1)``; integer
    value ``x`` stands for ``x / D``.
    """

    w1: tuple[tuple[int, ...], ...]
    r1: tuple[tuple[int, ...], ...]
    w2: tuple[tuple[int, ...], ...]
    r2: tuple[tuple[int, ...], ...]
    D: int
    h1: int
    h2: int

    def descale(self, x: int) -> Fraction:
        return Fraction(x, self.D)


def contribution_tables(inst: Instance) -> ContributionTables:
    _require_two(inst)
    h1, h2 = inst.shape
    v1, v2 = inst.marginals[0].values, inst.marginals[1].values
    f = [[inst.mass((i, j)) for j in range(h2)] for i in range(h1)]
    zero = Fraction(0)
    w1 = [[zero] * (h2 + 1) for _ in range(h1 + 1)]
    r1 = [[zero] * (h2 + 1) for _ in range(h1 + 1)]
    w2 = [[zero] * (h2 + 1) for _ in range(h1 + 1)]
    r2 = [[zero] * (h2 + 1) for _ in range(h1 + 1)]
    for j in range(h2):
        for k in range(h1):
            w1[k][j] = sum((v1[t] * f[t][j] for t in range(k, h1)), zero)
            r1[k][j] = v1[k] * sum((f[t][j] for t in range(k, h1)), zero)
    for i in range(h1):
        for k in range(h2):
            w2[i][k] = sum((v2[t] * f[i][t] for t in range(k, h2)), zero)
            r2[i][k] = v2[k] * sum((f[i][t] for t in range(k, h2)), zero)
    D = math.lcm(*(x.denominator for tab in (w1, r1, w2, r2) for row in tab for x in row))

    def scale(tab):
        return tuple(tuple(int(x * D) for x in row) for row in tab)

    return ContributionTables(scale(w1), scale(r1), scale(w2), scale(r2), D, h1, h2)


def _floor_units(x: int, D: int, gamma: Fraction) -> int:
    """floor((x / D) / gamma)"""
    return (x * gamma.denominator) // (D * gamma.numerator)


def _pareto_prune(cell: dict) -> dict:
    items = sorted(cell.items(), key=lambda kv: (-kv[0][0], -kv[0][1]))
    kept = {}
    best = None
    for v, wit in items:
        if best is None or v[1] > best:
            kept[v] = wit
            best = v[1]
    # restore first-derivation order for determinism of later iteration
    return {v: cell[v] for v in cell if v in kept}


class DPValueSet:
    """Achievable values per subproblem with witness links.

    ``cells[(i, j)]`` maps each achievable integer value (or integer pair in
    joint mode) to ``(term, k, l, predecessor)``; ``term`` is 1, 2 or 3 and
    ``k``/``l`` are the peel thresholds.
    """

    def __init__(self, tables: ContributionTables, objective: str, rounding=None, prune: bool = False):
        if objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if prune and objective != "joint":
            raise ValueError("dominance pruning only applies to joint mode")
        self.tables = tables
        self.objective = objective
        self.rounding = rounding
        self.prune = prune
        self._contrib = self._build_contributions()
        self.cells: dict[tuple[int, int], dict[Any, tuple]] = {}
        self._run()

    # -- construction -----------------------------------------------------

    def _units(self):
        if self.rounding is None:
            return None
        if self.objective == "joint":
            gw, gr = (to_fraction(g) for g in self.rounding)
            return gw, gr
        return (to_fraction(self.rounding),)

    def _build_contributions(self):
        t = self.tables
        units = self._units()
        if units is not None and any(g <= 0 for g in units):
            raise ValueError("rounding grid must be positive")

        def conv(w: int, r: int):
            if self.objective == "welfare":
                return w if units is None else _floor_units(w, t.D, units[0])
            if self.objective == "revenue":
                return r if units is None else _floor_units(r, t.D, units[0])
            if units is None:
                return (w, r)
            return (_floor_units(w, t.D, units[0]), _floor_units(r, t.D, units[1]))

        c1 = [[conv(t.w1[k][j], t.r1[k][j]) for j in range(t.h2 + 1)] for k in range(t.h1 + 1)]
        c2 = [[conv(t.w2[i][k], t.r2[i][k]) for k in range(t.h2 + 1)] for i in range(t.h1 + 1)]
        return c1, c2

    def _zero(self):
        return (0, 0) if self.objective == "joint" else 0

    def _add(self, a, b):
        if self.objective == "joint":
            return (a[0] + b[0], a[1] + b[1])
        return a + b

    def _run(self) -> None:
        t = self.tables
        h1, h2 = t.h1, t.h2
        c1, c2 = self._contrib
        zero = self._zero()
        for i in range(h1 + 1):
            self.cells[(i, h2)] = {zero: None}
        for j in range(h2 + 1):
            self.cells[(h1, j)] = {zero: None}
        add = self._add
        for s in range(h1 + h2 - 2, -1, -1):  # anti-diagonal wavefront
            for i in range(max(0, s - h2 + 1), min(h1 - 1, s) + 1):
                j = s - i
                cell: dict = {}
                below = self.cells[(i + 1, j)]
                for k in range(j, h2 + 1):
                    c = c2[i][k]
                    for v in below:
                        nv = add(v, c)
                        if nv not in cell:
                            cell[nv] = (1, k, None, v)
                right = self.cells[(i, j + 1)]
                for k in range(i, h1 + 1):
                    c = c1[k][j]
                    for v in right:
                        nv = add(v, c)
                        if nv not in cell:
                            cell[nv] = (2, k, None, v)
                diag = self.cells[(i + 1, j + 1)]
                for k in range(i + 1, h1 + 1):
                    for l in range(j + 1, h2 + 1):
                        c = add(c1[k][j], c2[i][l])
                        for v in diag:
                            nv = add(v, c)
                            if nv not in cell:
                                cell[nv] = (3, k, l, v)
                if self.prune:
                    cell = _pareto_prune(cell)
                self.cells[(i, j)] = cell

    # -- queries ----------------------------------------------------------

    @property
    def root(self) -> dict:
        return self.cells[(0, 0)]

    @property
    def unit(self) -> Fraction | tuple[Fraction, Fraction]:
        """Real value of one integer step."""
        units = self._units()
        if units is None:
            u = Fraction(1, self.tables.D)
            return (u, u) if self.objective == "joint" else u
        return units if self.objective == "joint" else units[0]

    def descale(self, v):
        u = self.unit
        if self.objective == "joint":
            return ObjectivePoint(v[0] * u[0], v[1] * u[1])
        return v * u

    def values(self) -> set:
        """De-scaled achievable values at the root (pairs in joint mode)."""
        return {self.descale(v) for v in self.root}

    def witness(self, value, cell: tuple[int, int] = (0, 0)) -> AllocationMatrix:
        """Allocation matrix of the full instance realizing ``value`` at ``cell``.

        Rows/columns outside the sub-rectangle of ``cell`` are left unsold.
        """
        t = self.tables
        h1, h2 = t.h1, t.h2
        grid = [[0] * h2 for _ in range(h1)]
        i, j = cell
        v = value
        while i < h1 and j < h2:
            term, k, l, pred = self.cells[(i, j)][v]
            i, j = apply_peel(grid, i, j, term, k, l)
            v = pred
        return AllocationMatrix((h1, h2), tuple(x for row in grid for x in row))


def apply_peel(grid: list[list[int]], i: int, j: int, term: int, k: int, l: int | None) -> tuple[int, int]:
    """Write one peel step into ``grid`` and return the next subproblem."""
    h1, h2 = len(grid), len(grid[0])
    if term in (1, 3):
        for c in range(k if term == 1 else l, h2):
            grid[i][c] = 2
    if term in (2, 3):
        for r in range(k, h1):
            grid[r][j] = 1
    if term == 1:
        return i + 1, j
    if term == 2:
        return i, j + 1
    return i + 1, j + 1


def achievable_values(inst: Instance, objective: str = "welfare", rounding=None, prune: bool = False) -> DPValueSet:
    """Run the dynamic program; see :class:`DPValueSet`.

    ``rounding`` floors every contribution to a multiple of the given grid
    (a pair ``(gamma_w, gamma_r)`` in joint mode). ``prune`` keeps only the
    undominated pairs per subproblem, which preserves every answer to a
    domination query.
    """
    _require_two(inst)
    return DPValueSet(contribution_tables(inst), objective, rounding, prune)


def exact_witness(inst: Instance, objective: str, C: Any) -> Mechanism | None:
    """A feasible mechanism whose ``objective`` is exactly ``C``, or None."""
    _require_two(inst)
    if objective not in ("welfare", "revenue"):
        raise ValueError("objective must be 'welfare' or 'revenue'")
    C = to_fraction(C)
    dp = achievable_values(inst, objective)
    scaled = C * dp.tables.D
    if scaled.denominator != 1 or int(scaled) not in dp.root:
        return None
    mech = make_mechanism(dp.witness(int(scaled)), inst)
    got = mech.welfare if objective == "welfare" else mech.revenue
    if got != C:  # pragma: no cover - soundness guard
        raise AssertionError(f"witness evaluates to {got}, expected {C}")
    return mech


def dp_pareto(inst: Instance):
    """Exact Pareto set from the pruned joint program, with witness matrices."""
    from .model import pareto_filter

    dp = achievable_values(inst, "joint", prune=True)
    pts = [(dp.descale(v), v) for v in dp.root]
    front = pareto_filter(pts)
    return [(p, make_mechanism(dp.witness(v), inst)) for p, v in front]
