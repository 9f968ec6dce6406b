import random
from fractions import Fraction as F

import pytest
from hypothesis import strategies as st

from pareto_auction.model import Instance, MarginalDistribution


def random_instance(rng: random.Random, h1: int, h2: int, correlated: bool = False, maxden: int = 12) -> Instance:
    """Two bidders, values and masses with denominators at most ``maxden``."""

    def values(h):
        s = set()
        while len(s) < h:
            s.add(F(rng.randint(1, 3 * maxden), rng.randint(1, maxden)))
        return sorted(s)

    def masses(h):
        while True:
            w = [rng.randint(1, 4) for _ in range(h)]
            if sum(w) <= maxden:
                return [F(x, sum(w)) for x in w]

    v1, v2 = values(h1), values(h2)
    if correlated:
        while True:
            w = [[rng.randint(0, 2) for _ in range(h2)] for _ in range(h1)]
            tot = sum(map(sum, w))
            rows_ok = all(sum(r) > 0 for r in w)
            cols_ok = all(sum(w[i][j] for i in range(h1)) > 0 for j in range(h2))
            if rows_ok and cols_ok and tot <= maxden:
                return Instance.from_joint(v1, v2, [[F(x, tot) for x in r] for r in w])
    return Instance.independent((v1, masses(h1)), (v2, masses(h2)))


def regular_instance(rng: random.Random, h1: int, h2: int) -> Instance:
    from pareto_auction.classic import virtual_values

    while True:
        inst = random_instance(rng, h1, h2)
        if virtual_values(inst).regular:
            return inst


@pytest.fixture
def nonconvex2x2():
    third, two_thirds = F(1, 3), F(2, 3)
    return Instance(
        (
            MarginalDistribution((F(11), F(20)), (third, two_thirds)),
            MarginalDistribution((F(2), F(5)), (third, two_thirds)),
        )
    )


@pytest.fixture
def singleton():
    return Instance.independent(([1], [1]), ([2], [1]))


@pytest.fixture
def uniform12():
    return Instance.independent(([1, 2], [F(1, 2), F(1, 2)]))


@pytest.fixture
def rng():
    return random.Random(20240611)


small_fraction = st.fractions(min_value=F(1, 8), max_value=20, max_denominator=8)


@st.composite
def marginals(draw, max_size=3):
    h = draw(st.integers(1, max_size))
    vals = sorted(draw(st.sets(small_fraction, min_size=h, max_size=h)))
    weights = draw(st.lists(st.integers(1, 5), min_size=h, max_size=h))
    total = sum(weights)
    return MarginalDistribution(tuple(vals), tuple(F(w, total) for w in weights))


@st.composite
def two_bidder_instances(draw, max_size=3):
    return Instance((draw(marginals(max_size)), draw(marginals(max_size))))
