"""Hard and illustrative instance families, each with its closed-form targets.

The hardness constructions are stated with every support point carrying
mass 1. Generated instances use proper probabilities instead; every target
is multiplied by the same factor (recorded as ``metadata["mass_scale"]``),
which is exact because both objectives are linear in the tuple masses.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import errors
from .model import AllocationMatrix, Instance, MarginalDistribution, format_fraction, to_fraction

EXPONENTIAL_LIMIT = 16


@dataclass(frozen=True)
class GeneratedInstance:
    instance: Instance
    targets: dict[str, Fraction] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    def targets_dict(self) -> dict:
        """JSON-ready sidecar: targets and metadata with rationals as strings."""
        return {
            "targets": {k: format_fraction(v) for k, v in self.targets.items()},
            "metadata": _jsonable(self.metadata),
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _uniform(values: Sequence[Fraction]) -> MarginalDistribution:
    h = len(values)
    return MarginalDistribution(tuple(values), (Fraction(1, h),) * h)


def gen_nonconvex() -> GeneratedInstance:
    """Two independent binary bidders whose Pareto curve is not convex."""
    masses = (Fraction(1, 3), Fraction(2, 3))
    inst = Instance((MarginalDistribution((11, 20), masses), MarginalDistribution((2, 5), masses)))
    return GeneratedInstance(inst, {}, {"family": "nonconvex"})


# ---------------------------------------------------------------------------
# exact-welfare Partition reduction


def gen_partition_welfare(B: Sequence[int]) -> GeneratedInstance:
    """Two uniform bidders on ``{1..k}`` and ``{i + b'_i}``; target welfare encodes a partition of ``B``.

    A mechanism with welfare exactly ``targets["welfare"]`` exists iff ``B``
    splits into two halves of equal sum.
    """
    B = [int(b) for b in B]
    k = len(B)
    if k < 2:
        raise errors.TooSmall("need at least two numbers")
    if any(b <= 0 for b in B):
        raise errors.AuctionError("numbers must be positive integers")
    if any(B[i] < B[i + 1] for i in range(k - 1)):
        raise errors.NotDescending("numbers must be sorted in descending order")
    T = sum(B)
    bp = [Fraction(b, 10 * k * T) for b in B]
    row = [Fraction(i) for i in range(1, k + 1)]
    col = [i + bp[i - 1] for i in range(1, k + 1)]
    inst = Instance((_uniform(row), _uniform(col)))
    unit_target = (
        Fraction(2, 3) * (k - 1) * k * (k + 1)
        + Fraction(1, 2) * k * (k + 1)
        + sum(((i - 1) * bp[i - 1] for i in range(2, k + 1)), Fraction(0))
        + Fraction(1, 20 * k)
    )
    scale = Fraction(1, k * k)
    return GeneratedInstance(
        inst,
        {"welfare": unit_target * scale},
        {
            "family": "partition-welfare",
            "k": k,
            "B": B,
            "T": T,
            "b_prime": bp,
            "unit_mass_target": unit_target,
            "mass_scale": scale,
            "rescaled": True,
        },
    )


def is_partitionable(xs: Sequence[Any]) -> bool:
    """Whether the multiset splits into two parts of equal sum (brute force)."""
    xs = [to_fraction(x) for x in xs]
    total = sum(xs, Fraction(0))
    sums = {Fraction(0)}
    for x in xs:
        sums |= {s + x for s in sums}
    return total / 2 in sums


# ---------------------------------------------------------------------------
# bi-criterion Partition reduction


def _bicriterion_eps(a: Sequence[Fraction], support: int, k: int) -> Fraction:
    accuracy = Fraction(1, math.lcm(*(x.denominator for x in a)))
    p = 0
    while Fraction(1, 2**p) * 2 * support**2 * (2 * k + 1) >= accuracy:
        p += 1
    return Fraction(1, 2**p)


def gen_partition_bicriterion(A: Sequence[Any], eps_construction: Any = None) -> GeneratedInstance:
    """Two bidders on ``2k + 1`` points whose (welfare, revenue) target encodes a partition of ``A``.

    Odd support indices (1-based) carry unit weight and even ones weight
    ``eps``. ``targets`` holds the welfare and revenue thresholds; a
    mechanism meeting both exists iff ``A`` has an equal-sum split.
    """
    raw = [to_fraction(x) for x in A]
    k = len(raw)
    if k < 2:
        raise errors.TooSmall("need at least two numbers")
    if any(x <= 0 for x in raw):
        raise errors.AuctionError("numbers must be positive")
    total = sum(raw)
    a = [x / (100 * total) for x in raw]
    size = 2 * k + 1
    eps = _bicriterion_eps(a, size, k) if eps_construction is None else to_fraction(eps_construction)
    if eps <= 0:
        raise errors.AuctionError("construction eps must be positive")

    v1, v2 = [], []
    for i in range(1, size + 1):
        if i == size:
            v1.append(Fraction(size))
        elif i % 2 == 1:
            v1.append(i + a[(i + 1) // 2 - 1])
        else:
            v1.append(i + a[i // 2 - 1] * (1 + Fraction(4) / ((2 * k - i + 2) * (1 + eps))))
        v2.append(Fraction(i))
    weights = [Fraction(1) if i % 2 == 1 else eps for i in range(1, size + 1)]
    Z = sum(weights)
    masses = tuple(w / Z for w in weights)
    inst = Instance((MarginalDistribution(tuple(v1), masses), MarginalDistribution(tuple(v2), masses)))

    X, Y = {}, {}
    for i in range(1, 2 * k, 2):
        terms = _block_terms(v1, v2, eps, k, i)
        X[i] = terms["SW2"] - i
        Y[i] = terms["Rev1"] - i
    half = sum(a) / 2
    unit_w = sum((i + X[i] for i in X), Fraction(0)) + size + half
    unit_r = sum((i + Y[i] for i in Y), Fraction(0)) + size + half
    scale = 1 / (Z * Z)
    return GeneratedInstance(
        inst,
        {"welfare": unit_w * scale, "revenue": unit_r * scale},
        {
            "family": "partition-bicriterion",
            "k": k,
            "A": raw,
            "a": a,
            "eps": eps,
            "unit_mass_targets": {"welfare": unit_w, "revenue": unit_r},
            "mass_scale": scale,
            "rescaled": True,
        },
    )


def _block_terms(v1, v2, eps, k, i) -> dict[str, Fraction]:
    """Unit-mass welfare/revenue of row ``i`` and column ``i`` (odd, 1-based) for either diagonal winner."""
    V1 = lambda t: v1[t - 1]  # noqa: E731
    V2 = lambda t: v2[t - 1]  # noqa: E731
    js = range((i + 1) // 2, k + 1)
    odd = sum((V1(2 * j + 1) for j in js), Fraction(0)) + sum((V2(2 * j + 1) for j in js), Fraction(0))
    even = eps * (sum((V1(2 * j) for j in js), Fraction(0)) + sum((V2(2 * j) for j in js), Fraction(0)))
    m = Fraction(2 * k - i + 1, 2)
    mm = Fraction(2 * k - i - 1, 2)
    return {
        "SW1": V1(i) + odd + even,
        "SW2": odd + V2(i) + even,
        "Rev1": V1(i) * (m * (1 + eps) + 1) + V2(i + 1) * (mm + m * eps + 1),
        "Rev2": V1(i + 1) * (mm + m * eps + 1) + V2(i) * (m * (1 + eps) + 1),
    }


def bicriterion_block_terms(gen: GeneratedInstance, i: int) -> dict[str, Fraction]:
    """Closed-form block contributions for odd ``i`` of a bicriterion instance (unit masses)."""
    inst = gen.instance
    k = gen.metadata["k"]
    if i % 2 == 0 or not 1 <= i <= 2 * k - 1:
        raise ValueError("block index must be odd and at most 2k - 1")
    return _block_terms(inst.marginals[0].values, inst.marginals[1].values, gen.metadata["eps"], k, i)


def bicriterion_mechanism(gen: GeneratedInstance, diagonal: Sequence[int]) -> AllocationMatrix:
    """Bidder 2 above the diagonal, bidder 1 below, ``diagonal[t]`` on cell (t, t)."""
    h = gen.instance.shape[0]
    if len(diagonal) != h:
        raise ValueError(f"need {h} diagonal entries")
    return _staircase_matrix(h, diagonal)


def _staircase_matrix(h: int, diagonal: Sequence[int]) -> AllocationMatrix:
    def winner(idx):
        r, c = idx
        if c > r:
            return 2
        if c < r:
            return 1
        return int(diagonal[r])

    return AllocationMatrix.from_function((h, h), winner)


# ---------------------------------------------------------------------------
# exponential Pareto family


def gen_exponential_pareto(k: int, limit: int = EXPONENTIAL_LIMIT) -> GeneratedInstance:
    """Uniform bidders on ``{i + a_i}`` and ``{i}`` with super-increasing ``a_i = 3^(i-1) / N``.

    All ``2^k`` staircase mechanisms that differ only on the diagonal are
    Pareto optimal.
    """
    k = int(k)
    if k < 2:
        raise errors.TooSmall("k must be at least 2")
    if k > limit:
        raise errors.TooLarge(f"k={k} exceeds the limit {limit}")
    N = 1000 * (3**k - 1) // 2 + 1
    a = [Fraction(3 ** (i - 1), N) for i in range(1, k + 1)]
    v1 = [i + a[i - 1] for i in range(1, k + 1)]
    v2 = [Fraction(i) for i in range(1, k + 1)]
    inst = Instance((_uniform(v1), _uniform(v2)))
    if not (flip_precondition(a) and prefix_precondition(a)):  # pragma: no cover - holds by construction
        raise AssertionError("perturbations violate the ordering preconditions")
    return GeneratedInstance(inst, {}, {"family": "exponential", "k": k, "a": a, "N": N})


def flip_precondition(a: Sequence[Fraction]) -> bool:
    """``0 < a_i < ((k - i) / (k - i + 1)) * a_{i+1}`` for ``i = 1..k-1``."""
    k = len(a)
    return all(x > 0 for x in a) and all(
        a[i - 1] < Fraction(k - i, k - i + 1) * a[i] for i in range(1, k)
    )


def prefix_precondition(a: Sequence[Fraction]) -> bool:
    """Super-increase: each ``a_i`` exceeds the sum of its predecessors."""
    return all(sum(a[: i - 1], Fraction(0)) < a[i - 1] for i in range(1, len(a) + 1))


def diagonal_mechanism(gen: GeneratedInstance, diagonal: Sequence[int]) -> AllocationMatrix:
    """Staircase mechanism with the given diagonal winners (each 1 or 2).

    Rows index bidder 1's values, so bidder 2 wins strictly above the
    diagonal (its index is larger) and bidder 1 strictly below.
    """
    h = gen.instance.shape[0]
    if len(diagonal) != h or any(d not in (1, 2) for d in diagonal):
        raise ValueError("diagonal must list 1 or 2 for every support index")
    return _staircase_matrix(h, diagonal)


def all_diagonals(k: int):
    return itertools.product((1, 2), repeat=k)


# ---------------------------------------------------------------------------
# binary n-bidder Partition reduction


def gen_binary_partition(B: Sequence[Any]) -> GeneratedInstance:
    """``k`` binary bidders on ``{b_i, 2^i}``; target welfare encodes a partition of ``B``."""
    raw = [to_fraction(x) for x in B]
    k = len(raw)
    if k < 2:
        raise errors.TooSmall("need at least two numbers")
    if any(x <= 0 for x in raw):
        raise errors.AuctionError("numbers must be positive")
    total = sum(raw)
    b = [x / (100 * total) for x in raw]
    highs = [Fraction(2**i) for i in range(1, k + 1)]
    inst = Instance(tuple(_uniform((lo, hi)) for lo, hi in zip(b, highs)))
    unit_target = sum(highs) + sum(b) / 2
    scale = Fraction(1, 2**k)
    return GeneratedInstance(
        inst,
        {"welfare": unit_target * scale},
        {
            "family": "binary-partition",
            "k": k,
            "B": raw,
            "b": b,
            "h": highs,
            "unit_mass_target": unit_target,
            "mass_scale": scale,
            "rescaled": True,
        },
    )


FAMILIES = {
    "nonconvex": gen_nonconvex,
    "partition-welfare": gen_partition_welfare,
    "partition-bicriterion": gen_partition_bicriterion,
    "exponential": gen_exponential_pareto,
    "binary-partition": gen_binary_partition,
}
