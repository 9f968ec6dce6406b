"""Vickrey, discrete Myerson with ironing, and the revenue + lambda * welfare optimum.

For independent bidders and threshold payments on the support, the revenue
of a monotone allocation equals the expected virtual value of the winner,
so ``revenue + lam * welfare`` is the expected value of the winner's
combined score ``phi + lam * v``. Allocating to the highest ironed score
(when it is non-negative) maximizes that objective over all monotone
mechanisms, randomized ones included. Sweeping ``lam`` traces the vertices
of the upper convex envelope of the deterministic point cloud, which is the
randomized trade-off curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from . import errors
from .model import (
    AllocationMatrix,
    Instance,
    Mechanism,
    ObjectivePoint,
    make_mechanism,
    to_fraction,
)


@dataclass(frozen=True)
class VirtualValueTable:
    values: tuple[tuple[Fraction, ...], ...]
    regular: bool


@dataclass(frozen=True)
class IronedCurve:
    values: tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class RandomizedMechanism:
    components: tuple[tuple[Mechanism, Fraction], ...]

    @property
    def objectives(self) -> ObjectivePoint:
        w = sum((m.welfare * p for m, p in self.components), Fraction(0))
        r = sum((m.revenue * p for m, p in self.components), Fraction(0))
        return ObjectivePoint(w, r)


def _require_independent(inst: Instance) -> None:
    if not inst.is_independent:
        raise errors.CorrelatedUnsupported("this mechanism needs independent valuations")


def vickrey(inst: Instance) -> Mechanism:
    """Sell to a highest-value bidder (lowest index on ties) at the threshold price."""

    def winner(idx):
        vals = [inst.value(b + 1, k) for b, k in enumerate(idx)]
        return vals.index(max(vals)) + 1

    return make_mechanism(AllocationMatrix.from_function(inst.shape, winner), inst)


def _virtual_values_1d(values: Sequence[Fraction], masses: Sequence[Fraction]) -> tuple[Fraction, ...]:
    h = len(values)
    out = []
    tail = Fraction(0)
    for k in range(h - 1, -1, -1):
        if k == h - 1:
            out.append(values[k])
        else:
            out.append(values[k] - (values[k + 1] - values[k]) * tail / masses[k])
        tail += masses[k]
    return tuple(reversed(out))


def _non_decreasing(xs: Sequence[Fraction]) -> bool:
    return all(a <= b for a, b in zip(xs, xs[1:]))


def is_regular(values: Sequence[Any], masses: Sequence[Any]) -> bool:
    """Whether the discrete virtual values of this distribution are non-decreasing."""
    vals = [to_fraction(v) for v in values]
    ms = [to_fraction(m) for m in masses]
    return _non_decreasing(_virtual_values_1d(vals, ms))


def virtual_values(inst: Instance) -> VirtualValueTable:
    _require_independent(inst)
    table = tuple(_virtual_values_1d(m.values, m.masses) for m in inst.marginals)
    return VirtualValueTable(table, all(_non_decreasing(phi) for phi in table))


def iron_sequence(scores: Sequence[Fraction], masses: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Slopes of the least concave majorant of the cumulative score curve.

    The curve is plotted in quantile space from the top of the support:
    selling to the indices ``k >= t`` has quantile ``sum(masses[t:])`` and
    cumulative score ``sum(masses[k] * scores[k] for k >= t)``.
    """
    h = len(scores)
    # points ordered by increasing quantile: t = h, h-1, ..., 0
    qs = [Fraction(0)]
    cs = [Fraction(0)]
    for k in range(h - 1, -1, -1):
        qs.append(qs[-1] + masses[k])
        cs.append(cs[-1] + masses[k] * scores[k])
    hull = [0]
    for p in range(1, h + 1):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # b lies on or below the chord from a to p: not a hull vertex
            if (cs[b] - cs[a]) * (qs[p] - qs[a]) <= (cs[p] - cs[a]) * (qs[b] - qs[a]):
                hull.pop()
            else:
                break
        hull.append(p)
    ironed_by_point = [Fraction(0)] * (h + 1)
    for a, b in zip(hull, hull[1:]):
        slope = (cs[b] - cs[a]) / (qs[b] - qs[a])
        for p in range(a + 1, b + 1):
            ironed_by_point[p] = slope
    # point p covers support index h - p
    return tuple(ironed_by_point[h - k] for k in range(h))


def iron(vv: VirtualValueTable, inst: Instance) -> IronedCurve:
    _require_independent(inst)
    return IronedCurve(tuple(iron_sequence(phi, m.masses) for phi, m in zip(vv.values, inst.marginals)))


def _score_auction(inst: Instance, scores: Sequence[Sequence[Fraction]]) -> Mechanism:
    """Allocate to the highest score when it is non-negative; lowest index on ties."""

    def winner(idx):
        best, who = None, 0
        for b, k in enumerate(idx):
            s = scores[b][k]
            if s >= 0 and (best is None or s > best):
                best, who = s, b + 1
        return who

    return make_mechanism(AllocationMatrix.from_function(inst.shape, winner), inst)


def combined_scores(inst: Instance, lam: Any) -> tuple[tuple[Fraction, ...], ...]:
    """Ironed ``phi + lam * v`` per bidder."""
    lam = to_fraction(lam)
    vv = virtual_values(inst)
    out = []
    for phi, m in zip(vv.values, inst.marginals):
        raw = tuple(p + lam * v for p, v in zip(phi, m.values))
        out.append(iron_sequence(raw, m.masses))
    return tuple(out)


def myerson(inst: Instance) -> Mechanism:
    """Revenue-optimal deterministic auction for independent bidders."""
    _require_independent(inst)
    ironed = iron(virtual_values(inst), inst)
    return _score_auction(inst, ironed.values)


def lambda_optimal(inst: Instance, lam: Any) -> Mechanism:
    """Mechanism maximizing ``revenue + lam * welfare``."""
    _require_independent(inst)
    lam = to_fraction(lam)
    if lam < 0:
        raise errors.NegativeLambda("lambda must be non-negative")
    return _score_auction(inst, combined_scores(inst, lam))


def combined_value(m: Mechanism, lam: Fraction) -> Fraction:
    return m.revenue + lam * m.welfare


@dataclass(frozen=True)
class SweepVertex:
    """A vertex of the randomized trade-off curve and a lambda at which it is optimal."""

    mechanism: Mechanism
    lam: Fraction


def _welfare_endpoint(inst: Instance) -> tuple[Mechanism, Fraction]:
    """A lambda large enough that the lambda-optimum maximizes welfare."""
    best_welfare = vickrey(inst).welfare
    vv = virtual_values(inst)
    spread = max(max(phi) for phi in vv.values) - min(min(phi) for phi in vv.values)
    values = sorted({v for m in inst.marginals for v in m.values})
    gaps = [b - a for a, b in zip(values, values[1:])]
    lam = 1 + spread / (min(gaps) if gaps else 1)
    for _ in range(64):
        m = lambda_optimal(inst, lam)
        if m.welfare == best_welfare:
            return m, lam
        lam *= 2
    raise RuntimeError("no lambda reached the welfare maximum")  # pragma: no cover


def lambda_sweep(inst: Instance) -> list[SweepVertex]:
    """Vertices of the randomized trade-off, from the Myerson end to the welfare end.

    Adjacent vertices ``A`` (lower welfare) and ``B`` are refined by solving
    for the lambda at which both score equally and asking the
    lambda-optimum whether anything beats that line; there are finitely
    many vertices, so the recursion terminates with exact rationals only.
    """
    _require_independent(inst)
    start = lambda_optimal(inst, 0)
    end, lam_end = _welfare_endpoint(inst)
    if end.objectives == start.objectives:
        return [SweepVertex(start, Fraction(0))]

    def refine(a: SweepVertex, b: SweepVertex) -> list[SweepVertex]:
        dw = b.mechanism.welfare - a.mechanism.welfare
        if dw <= 0:
            return [a]
        lam = (a.mechanism.revenue - b.mechanism.revenue) / dw
        lam = max(lam, Fraction(0))
        c = lambda_optimal(inst, lam)
        if combined_value(c, lam) > combined_value(a.mechanism, lam) and c.objectives not in (
            a.mechanism.objectives,
            b.mechanism.objectives,
        ):
            mid = SweepVertex(c, lam)
            return refine(a, mid) + refine(mid, b)
        return [a]

    first = SweepVertex(start, Fraction(0))
    last = SweepVertex(end, lam_end)
    return refine(first, last) + [last]


def randomized_tradeoff(inst: Instance, target_welfare: Any) -> RandomizedMechanism:
    """Revenue-maximal randomized mechanism with expected welfare exactly ``target_welfare``.

    Mixes at most two adjacent vertices of the lambda sweep.
    """
    _require_independent(inst)
    target = to_fraction(target_welfare)
    verts = lambda_sweep(inst)
    lo, hi = verts[0].mechanism.welfare, verts[-1].mechanism.welfare
    if not lo <= target <= hi:
        raise errors.TargetOutOfRange(f"target welfare must lie in [{lo}, {hi}]")
    for v in verts:
        if v.mechanism.welfare == target:
            return RandomizedMechanism(((v.mechanism, Fraction(1)),))
    for a, b in zip(verts, verts[1:]):
        wa, wb = a.mechanism.welfare, b.mechanism.welfare
        if wa < target < wb:
            t = (target - wa) / (wb - wa)
            return RandomizedMechanism(((a.mechanism, 1 - t), (b.mechanism, t)))
    raise errors.TargetOutOfRange("target not bracketed by the sweep")  # pragma: no cover
