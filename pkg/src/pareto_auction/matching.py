"""Matchings in the valuation-tuple graph of binary bidders versus auctions.

Nodes are the ``2^n`` index tuples (0 = low value, 1 = high value) plus one
dummy per high coordinate of each tuple. A tuple-tuple edge along
coordinate ``i`` means bidder ``i`` wins at both endpoints and pays its low
value; a dummy edge means bidder ``i`` wins only at its high value. Every
deterministic monotone auction arises from exactly one matching.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

from . import errors
from .model import AllocationMatrix, Instance, Mechanism, ObjectivePoint, format_fraction, make_mechanism

DEFAULT_LIMIT = 4


class Dummy(NamedTuple):
    tuple: tuple[int, ...]
    bidder: int  # 1-based


Node = tuple | Dummy


class Edge(NamedTuple):
    u: tuple[int, ...]
    v: tuple[int, ...] | Dummy
    bidder: int
    welfare: Fraction
    revenue: Fraction

    @property
    def is_dummy(self) -> bool:
        return isinstance(self.v, Dummy)


@dataclass(frozen=True)
class AuctionGraph:
    instance: Instance
    tuples: tuple[tuple[int, ...], ...]
    dummies: tuple[Dummy, ...]
    edges: tuple[Edge, ...]

    @property
    def nodes(self) -> tuple:
        return self.tuples + self.dummies

    def incident(self, node: tuple[int, ...]) -> list[Edge]:
        return [e for e in self.edges if e.u == node or e.v == node]

    def edge_between(self, a, b) -> Edge | None:
        for e in self.edges:
            if (e.u, e.v) in ((a, b), (b, a)):
                return e
        return None


def build_graph(inst: Instance, limit: int = DEFAULT_LIMIT) -> AuctionGraph:
    if any(h != 2 for h in inst.shape):
        raise errors.NotBinary("every bidder needs exactly two support values")
    if inst.n > limit:
        raise errors.LimitExceeded(f"{inst.n} bidders exceeds the limit {limit}")
    tuples = tuple(itertools.product((0, 1), repeat=inst.n))
    dummies, edges = [], []
    for t in tuples:
        for i in range(inst.n):
            if t[i] == 1:
                d = Dummy(t, i + 1)
                dummies.append(d)
                w = inst.mass(t) * inst.value(i + 1, 1)
                edges.append(Edge(t, d, i + 1, w, w))
            else:
                hi = t[:i] + (1,) + t[i + 1 :]
                lo_m, hi_m = inst.mass(t), inst.mass(hi)
                v_lo, v_hi = inst.value(i + 1, 0), inst.value(i + 1, 1)
                edges.append(Edge(t, hi, i + 1, lo_m * v_lo + hi_m * v_hi, v_lo * (lo_m + hi_m)))
    return AuctionGraph(inst, tuples, tuple(dummies), tuple(edges))


def matching_weight(m: Iterable[Edge]) -> ObjectivePoint:
    m = list(m)
    return ObjectivePoint(sum((e.welfare for e in m), Fraction(0)), sum((e.revenue for e in m), Fraction(0)))


def _resolve(g: AuctionGraph, m: Iterable) -> list[Edge]:
    """Accept edges or endpoint pairs; reject non-edges and shared endpoints."""
    out, seen = [], set()
    for item in m:
        e = item if isinstance(item, Edge) else g.edge_between(*item)
        if e is None or e not in g.edges:
            raise errors.NotAMatching(f"{item!r} is not an edge of the graph")
        if e.u in seen or e.v in seen:
            raise errors.NotAMatching("two edges share an endpoint")
        seen.update((e.u, e.v))
        out.append(e)
    return out


def matching_to_mechanism(g: AuctionGraph, m: Iterable) -> Mechanism:
    edges = _resolve(g, m)
    winners = {t: 0 for t in g.tuples}
    for e in edges:
        winners[e.u] = e.bidder
        if not e.is_dummy:
            winners[e.v] = e.bidder
    a = AllocationMatrix.from_function(g.instance.shape, lambda idx: winners[tuple(idx)])
    return make_mechanism(a, g.instance)


def enumerate_matchings(g: AuctionGraph, target_welfare: Fraction | None = None) -> Iterator[tuple[Edge, ...]]:
    """All matchings, or only those of welfare weight exactly ``target_welfare``.

    Tuples are decided in order; each is left unmatched, matched to one of
    its own dummies, or matched to a later free neighbor. With a target,
    branches are cut once the running weight overshoots or cannot reach it.
    """
    order = g.tuples
    pos = {t: k for k, t in enumerate(order)}
    options = {t: [] for t in order}
    for e in g.edges:
        options[e.u].append(e)
        if not e.is_dummy:
            options[e.v].append(e)
    best_from = [Fraction(0)] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        top = max((e.welfare for e in options[order[k]]), default=Fraction(0))
        best_from[k] = best_from[k + 1] + top
    used: set = set()
    chosen: list[Edge] = []

    def rec(k: int, w: Fraction):
        if target_welfare is not None and (w > target_welfare or w + best_from[k] < target_welfare):
            return
        while k < len(order) and order[k] in used:
            k += 1
        if k == len(order):
            if target_welfare is None or w == target_welfare:
                yield tuple(chosen)
            return
        t = order[k]
        used.add(t)
        yield from rec(k + 1, w)
        for e in options[t]:
            other = e.v if e.u == t else e.u
            if not e.is_dummy and (other in used or pos[other] < k):
                continue
            if not e.is_dummy:
                used.add(other)
            chosen.append(e)
            yield from rec(k + 1, w + e.welfare)
            chosen.pop()
            if not e.is_dummy:
                used.discard(other)
        used.discard(t)

    yield from rec(0, Fraction(0))


def matching_with_welfare(g: AuctionGraph, C) -> tuple[Edge, ...] | None:
    return next(enumerate_matchings(g, Fraction(C)), None)


def _label(node) -> str:
    if isinstance(node, Dummy):
        return f"d[{_label(node.tuple)},b{node.bidder}]"
    return "(" + ",".join(str(k + 1) for k in node) + ")"


def export_edges(g: AuctionGraph) -> str:
    """One edge per line: ``u v bidder welfare revenue`` with 1-based value indices."""
    lines = ["# u v bidder welfare revenue"]
    for e in g.edges:
        lines.append(f"{_label(e.u)} {_label(e.v)} {e.bidder} {format_fraction(e.welfare)} {format_fraction(e.revenue)}")
    return "\n".join(lines) + "\n"


def matching_objectives(g: AuctionGraph) -> list[ObjectivePoint]:
    return [matching_weight(m) for m in enumerate_matchings(g)]


def edges_by_kind(g: AuctionGraph) -> tuple[Sequence[Edge], Sequence[Edge]]:
    return [e for e in g.edges if not e.is_dummy], [e for e in g.edges if e.is_dummy]
