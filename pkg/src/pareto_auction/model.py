"""Exact-rational data model: instances, allocation matrices, mechanisms.

Everything that feeds an objective value is a :class:`fractions.Fraction`;
floats never enter a dominance or cover comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Iterable, Iterator, NamedTuple, Sequence

from . import errors

Rational = Fraction


def to_fraction(x: Any) -> Fraction:
    """Parse ``x`` as an exact rational.

    Accepts ints, Fractions and strings such as ``"3"``, ``"-2/7"`` or
    ``"0.05"``. Floats are rejected: they are not exact in the sense the
    input format promises.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise errors.InstanceError(f"not a rational: {x!r}") from exc
    raise TypeError(f"cannot interpret {type(x).__name__} {x!r} as an exact rational")


def format_fraction(x: Fraction) -> str:
    """Serialize as ``"p/q"`` or ``"p"``; inverse of :func:`to_fraction`."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class MarginalDistribution:
    values: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(to_fraction(v) for v in self.values)
        masses = tuple(to_fraction(m) for m in self.masses)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)
        if len(values) == 0 or len(values) != len(masses):
            raise errors.InstanceError("values and masses must be non-empty and of equal length")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise errors.NonIncreasingSupport(f"support not strictly increasing: {values}")
        if any(m <= 0 for m in masses):
            raise errors.NonPositiveMass(f"masses must be strictly positive: {masses}")
        if sum(masses) != 1:
            raise errors.MassNotOne(f"masses sum to {sum(masses)}, not 1")

    @property
    def size(self) -> int:
        return len(self.values)

    def tail_mass(self, k: int) -> Fraction:
        """Probability that the value index is at least ``k`` (0-based)."""
        return sum(self.masses[k:], Fraction(0))

    def mean(self) -> Fraction:
        return sum((v * m for v, m in zip(self.values, self.masses)), Fraction(0))


@dataclass(frozen=True)
class Instance:
    """Valuation distributions of ``n`` bidders.

    Without ``joint`` the bidders are independent and the tuple distribution
    is the product of the marginals. With ``joint`` (two bidders only) the
    tuple mass is read from the ``h1 x h2`` matrix and each marginal must be
    its row/column sum.
    """

    marginals: tuple[MarginalDistribution, ...]
    joint: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        marginals = tuple(self.marginals)
        object.__setattr__(self, "marginals", marginals)
        if not marginals:
            raise errors.InstanceError("an instance needs at least one bidder")
        if self.joint is None:
            return
        if len(marginals) != 2:
            raise errors.JointArityError("a joint distribution is only supported for two bidders")
        joint = tuple(tuple(to_fraction(x) for x in row) for row in self.joint)
        object.__setattr__(self, "joint", joint)
        h1, h2 = marginals[0].size, marginals[1].size
        if len(joint) != h1 or any(len(row) != h2 for row in joint):
            raise errors.ShapeMismatch(f"joint must be {h1}x{h2}")
        if any(x < 0 for row in joint for x in row):
            raise errors.NonPositiveMass("joint masses must be non-negative")
        if sum(sum(row) for row in joint) != 1:
            raise errors.MassNotOne("joint masses must sum to 1")
        rows = tuple(sum(row) for row in joint)
        cols = tuple(sum(joint[i][j] for i in range(h1)) for j in range(h2))
        if rows != marginals[0].masses or cols != marginals[1].masses:
            raise errors.JointMarginalMismatch("marginals disagree with the joint distribution")

    @classmethod
    def independent(cls, *bidders: tuple[Sequence[Any], Sequence[Any]]) -> "Instance":
        """``Instance.independent((values, masses), (values, masses), ...)``."""
        return cls(tuple(MarginalDistribution(tuple(v), tuple(m)) for v, m in bidders))

    @classmethod
    def from_joint(cls, values1, values2, joint) -> "Instance":
        """Two correlated bidders; marginals are derived from ``joint``."""
        joint = [[to_fraction(x) for x in row] for row in joint]
        rows = [sum(row, Fraction(0)) for row in joint]
        cols = [sum((row[j] for row in joint), Fraction(0)) for j in range(len(joint[0]))]
        m1 = MarginalDistribution(tuple(values1), tuple(rows))
        m2 = MarginalDistribution(tuple(values2), tuple(cols))
        return cls((m1, m2), tuple(tuple(r) for r in joint))

    @property
    def n(self) -> int:
        return len(self.marginals)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(m.size for m in self.marginals)

    @property
    def is_independent(self) -> bool:
        return self.joint is None

    def value(self, bidder: int, k: int) -> Fraction:
        """Value of ``bidder`` (1-based, as in allocation entries) at support index ``k``."""
        return self.marginals[bidder - 1].values[k]

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(h) for h in self.shape))

    @cached_property
    def _mass_table(self) -> dict[tuple[int, ...], Fraction]:
        if self.joint is not None:
            return {(i, j): self.joint[i][j] for i, j in self.tuples()}
        table = {}
        for idx in self.tuples():
            p = Fraction(1)
            for b, k in enumerate(idx):
                p *= self.marginals[b].masses[k]
            table[idx] = p
        return table

    def mass(self, idx: tuple[int, ...]) -> Fraction:
        return self._mass_table[tuple(idx)]

    def max_welfare_bound(self) -> Fraction:
        """``sum_tuples mass * max value``; bounds both objectives from above."""
        return sum(
            (self.mass(idx) * max(self.value(b + 1, k) for b, k in enumerate(idx)) for idx in self.tuples()),
            Fraction(0),
        )

    def scaled(self, c: Any) -> "Instance":
        """All support values multiplied by the positive rational ``c``."""
        c = to_fraction(c)
        if c <= 0:
            raise errors.InstanceError("scaling factor must be positive")
        marginals = tuple(MarginalDistribution(tuple(v * c for v in m.values), m.masses) for m in self.marginals)
        return Instance(marginals, self.joint)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "bidders": [
                {"values": [format_fraction(v) for v in m.values], "probs": [format_fraction(p) for p in m.masses]}
                for m in self.marginals
            ]
        }
        if self.joint is not None:
            out["joint"] = [[format_fraction(x) for x in row] for row in self.joint]
        return out


def validate_instance(raw: dict) -> Instance:
    """Build an :class:`Instance` from its JSON description, checking every invariant.

    ``probs`` may be omitted for a bidder when a ``joint`` matrix is given;
    the marginal is then derived from the joint.
    """
    if not isinstance(raw, dict) or "bidders" not in raw:
        raise errors.InstanceError("instance must be an object with a 'bidders' list")
    bidders = raw["bidders"]
    if not isinstance(bidders, list) or not bidders:
        raise errors.InstanceError("'bidders' must be a non-empty list")
    joint = raw.get("joint")
    if joint is None:
        marginals = []
        for b in bidders:
            if "probs" not in b:
                raise errors.InstanceError("each bidder needs 'probs' when no joint is given")
            marginals.append(MarginalDistribution(tuple(b["values"]), tuple(b["probs"])))
        return Instance(tuple(marginals))
    if len(bidders) != 2:
        raise errors.JointArityError("a joint distribution is only supported for two bidders")
    inst = Instance.from_joint(bidders[0]["values"], bidders[1]["values"], joint)
    for m, b in zip(inst.marginals, bidders):
        if "probs" in b and tuple(to_fraction(p) for p in b["probs"]) != m.masses:
            raise errors.JointMarginalMismatch("declared marginal disagrees with the joint distribution")
    return inst


# ---------------------------------------------------------------------------
# allocation matrices and mechanisms


def _strides(shape: tuple[int, ...]) -> tuple[int, ...]:
    strides, acc = [], 1
    for h in reversed(shape):
        strides.append(acc)
        acc *= h
    return tuple(reversed(strides))


@dataclass(frozen=True)
class AllocationMatrix:
    """Winner per valuation tuple, stored row-major (0 = item not sold)."""

    shape: tuple[int, ...]
    winners: tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(h) for h in self.shape)
        winners = tuple(int(w) for w in self.winners)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "winners", winners)
        if len(winners) != math.prod(shape):
            raise errors.ShapeMismatch(f"{len(winners)} entries for shape {shape}")
        if any(w < 0 or w > len(shape) for w in winners):
            raise errors.ShapeMismatch(f"entries must lie in 0..{len(shape)}")

    @classmethod
    def from_nested(cls, nested) -> "AllocationMatrix":
        import numpy as np

        arr = np.asarray(nested, dtype=int)
        return cls(arr.shape, tuple(arr.ravel().tolist()))

    @classmethod
    def from_function(cls, shape: Sequence[int], fn) -> "AllocationMatrix":
        shape = tuple(shape)
        return cls(shape, tuple(fn(idx) for idx in itertools.product(*(range(h) for h in shape))))

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "AllocationMatrix":
        return cls(tuple(shape), (0,) * math.prod(shape))

    @cached_property
    def strides(self) -> tuple[int, ...]:
        return _strides(self.shape)

    def flat(self, idx: Sequence[int]) -> int:
        return sum(i * s for i, s in zip(idx, self.strides))

    def __getitem__(self, idx: Sequence[int]) -> int:
        return self.winners[self.flat(idx)]

    def to_nested(self) -> list:
        import numpy as np

        return np.asarray(self.winners, dtype=int).reshape(self.shape).tolist()

    def tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(h) for h in self.shape))


class ObjectivePoint(NamedTuple):
    welfare: Fraction
    revenue: Fraction

    def dominates(self, other: "ObjectivePoint") -> bool:
        return self[0] >= other[0] and self[1] >= other[1]

    def __str__(self) -> str:
        return f"({format_fraction(self.welfare)}, {format_fraction(self.revenue)})"


@dataclass(frozen=True)
class Mechanism:
    allocation: AllocationMatrix
    payments: tuple[Fraction, ...]
    objectives: ObjectivePoint

    @property
    def welfare(self) -> Fraction:
        return self.objectives.welfare

    @property
    def revenue(self) -> Fraction:
        return self.objectives.revenue

    def to_dict(self) -> dict:
        return {
            "shape": list(self.allocation.shape),
            "winners": list(self.allocation.winners),
            "payments": [format_fraction(p) for p in self.payments],
        }


def _check_shape(a: AllocationMatrix, inst: Instance) -> None:
    if a.shape != inst.shape:
        raise errors.ShapeMismatch(f"allocation shape {a.shape} does not match instance {inst.shape}")


def is_monotone(a: AllocationMatrix, inst: Instance) -> bool:
    """True iff every bidder keeps winning when only their own value rises."""
    _check_shape(a, inst)
    strides = a.strides
    w = a.winners
    for idx in a.tuples():
        j = w[a.flat(idx)]
        if j == 0:
            continue
        b = j - 1
        if idx[b] + 1 < a.shape[b] and w[a.flat(idx) + strides[b]] != j:
            return False
    return True


def _require_monotone(a: AllocationMatrix, inst: Instance) -> None:
    if not is_monotone(a, inst):
        raise errors.NotMonotone("allocation matrix violates monotonicity")


def _threshold_indices(a: AllocationMatrix) -> tuple[int, ...]:
    """Per tuple, the winner's lowest support index at which they still win (-1 if unsold)."""
    w = a.winners
    out = []
    for idx in a.tuples():
        pos = a.flat(idx)
        j = w[pos]
        if j == 0:
            out.append(-1)
            continue
        b, s = j - 1, a.strides[j - 1]
        m = idx[b]
        while m > 0 and w[pos - (idx[b] - m + 1) * s] == j:
            m -= 1
        out.append(m)
    return tuple(out)


def threshold_payments(a: AllocationMatrix, inst: Instance) -> tuple[Fraction, ...]:
    """Row-major payments: the winner's threshold value, 0 where the item is kept."""
    _require_monotone(a, inst)
    pays = []
    for w, m in zip(a.winners, _threshold_indices(a)):
        pays.append(Fraction(0) if w == 0 else inst.value(w, m))
    return tuple(pays)


def _evaluate_unchecked(a: AllocationMatrix, inst: Instance, payments) -> ObjectivePoint:
    welfare = Fraction(0)
    revenue = Fraction(0)
    for idx, w, p in zip(a.tuples(), a.winners, payments):
        if w == 0:
            continue
        mass = inst.mass(idx)
        welfare += mass * inst.value(w, idx[w - 1])
        revenue += mass * p
    return ObjectivePoint(welfare, revenue)


def evaluate(a: AllocationMatrix, inst: Instance) -> ObjectivePoint:
    """Expected (welfare, revenue) of the mechanism with allocation ``a``."""
    return _evaluate_unchecked(a, inst, threshold_payments(a, inst))


def make_mechanism(a: AllocationMatrix, inst: Instance) -> Mechanism:
    pays = threshold_payments(a, inst)
    return Mechanism(a, pays, _evaluate_unchecked(a, inst, pays))


# ---------------------------------------------------------------------------
# dominance


def eps_covers(p: ObjectivePoint, q: ObjectivePoint, eps: Any) -> bool:
    """True iff ``p >= q / (1 + eps)`` componentwise."""
    eps = to_fraction(eps)
    if eps < 0:
        raise errors.NegativeEps("eps must be non-negative")
    scale = 1 + eps
    return p[0] * scale >= q[0] and p[1] * scale >= q[1]


@dataclass(frozen=True)
class ParetoSet:
    """Undominated points sorted by welfare ascending (revenue then strictly descends)."""

    points: tuple[ObjectivePoint, ...]
    handles: tuple[Any, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.handles))

    def covers(self, q: ObjectivePoint, eps: Any = 0) -> bool:
        return any(eps_covers(p, q, eps) for p in self.points)


def pareto_filter(points: Iterable[tuple[ObjectivePoint, Hashable]]) -> ParetoSet:
    """Keep exactly the undominated points; equal points keep the lowest handle."""
    items = [(ObjectivePoint(*p), h) for p, h in points]
    # welfare desc, revenue desc, handle asc: the first point seen at a given
    # position in the sweep is the representative.
    items.sort(key=lambda it: (-it[0][0], -it[0][1], _handle_key(it[1])))
    kept: list[tuple[ObjectivePoint, Any]] = []
    best_rev = None
    for p, h in items:
        if best_rev is None or p.revenue > best_rev:
            kept.append((p, h))
            best_rev = p.revenue
    kept.reverse()
    return ParetoSet(tuple(p for p, _ in kept), tuple(h for _, h in kept))


def _handle_key(h):
    # handles of mixed type still sort deterministically
    return (type(h).__name__, h) if h is not None else ("", 0)
