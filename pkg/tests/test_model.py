from fractions import Fraction as F
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from pareto_auction import errors
from pareto_auction.model import (
    AllocationMatrix,
    Instance,
    ObjectivePoint,
    eps_covers,
    evaluate,
    format_fraction,
    is_monotone,
    pareto_filter,
    threshold_payments,
    to_fraction,
    validate_instance,
)
from pareto_auction.oracle import enumerate_feasible

from conftest import two_bidder_instances


def raw(values, probs):
    return {"values": [str(v) for v in values], "probs": [str(p) for p in probs]}


class TestValidateInstance:
    def test_minimal(self):
        inst = validate_instance({"bidders": [raw([1], [1])]})
        assert inst.shape == (1,)

    def test_non_increasing(self):
        with pytest.raises(errors.NonIncreasingSupport):
            validate_instance({"bidders": [raw([2, 1], ["1/2", "1/2"])]})

    def test_uniform_joint(self):
        q = "1/4"
        inst = validate_instance(
            {
                "bidders": [raw([1, 2], ["1/2", "1/2"]), raw([1, 3], ["1/2", "1/2"])],
                "joint": [[q, q], [q, q]],
            }
        )
        assert inst.mass((1, 0)) == F(1, 4)
        assert inst.marginals[0].masses == (F(1, 2), F(1, 2))

    def test_marginal_mismatch(self):
        with pytest.raises(errors.JointMarginalMismatch):
            validate_instance(
                {
                    "bidders": [raw([1, 2], ["1/3", "2/3"]), raw([1, 3], ["1/2", "1/2"])],
                    "joint": [["1/4", "1/4"], ["1/4", "1/4"]],
                }
            )

    def test_joint_arity(self):
        with pytest.raises(errors.JointArityError):
            validate_instance({"bidders": [raw([1], [1])] * 3, "joint": [[1]]})

    def test_mass_errors(self):
        with pytest.raises(errors.NonPositiveMass):
            validate_instance({"bidders": [raw([1, 2], [0, 1])]})
        with pytest.raises(errors.MassNotOne):
            validate_instance({"bidders": [raw([1, 2], ["1/2", "1/3"])]})

    def test_round_trip(self, nonconvex2x2):
        assert validate_instance(nonconvex2x2.to_dict()) == nonconvex2x2


def test_fraction_parsing():
    assert to_fraction("0.05") == F(1, 20)
    assert to_fraction("-2/7") == F(-2, 7)
    with pytest.raises(TypeError):
        to_fraction(0.5)
    assert format_fraction(F(3)) == "3"
    assert format_fraction(F(6, 4)) == "3/2"


@given(st.fractions(max_denominator=10**6))
def test_format_round_trip(x):
    assert to_fraction(format_fraction(x)) == x


class TestMonotone:
    inst = Instance.independent(([1, 2], ["1/2", "1/2"]), ([1, 3], ["1/2", "1/2"]))

    def test_examples(self):
        assert is_monotone(AllocationMatrix.from_nested([[1, 2], [1, 1]]), self.inst)
        assert not is_monotone(AllocationMatrix.from_nested([[1, 0], [0, 1]]), self.inst)
        assert is_monotone(AllocationMatrix.zeros((2, 2)), self.inst)

    def test_shape_mismatch(self):
        with pytest.raises(errors.ShapeMismatch):
            is_monotone(AllocationMatrix.zeros((3, 2)), self.inst)


class TestThresholdPayments:
    one = Instance.independent(([1, 2], ["1/2", "1/2"]))

    def test_single_bidder(self):
        assert threshold_payments(AllocationMatrix((2,), (1, 1)), self.one) == (1, 1)
        assert threshold_payments(AllocationMatrix((2,), (0, 1)), self.one) == (0, 2)

    def test_two_bidders(self):
        inst = Instance.independent(([1, 2], ["1/2", "1/2"]), ([1, 3], ["1/2", "1/2"]))
        a = AllocationMatrix.from_nested([[1, 2], [1, 1]])
        # at (2, 2) bidder 1 loses when lowered to index 1, so the threshold is v1 = 2
        assert threshold_payments(a, inst) == (1, 3, 1, 2)

    def test_not_monotone(self):
        with pytest.raises(errors.NotMonotone):
            threshold_payments(AllocationMatrix((2,), (1, 0)), self.one)


class TestEvaluate:
    def test_singleton(self, singleton):
        a = AllocationMatrix((1, 1), (2,))
        assert evaluate(a, singleton) == (2, 2)

    def test_zero(self, nonconvex2x2):
        assert evaluate(AllocationMatrix.zeros((2, 2)), nonconvex2x2) == (0, 0)

    def test_nonconvex2x2_vickrey(self, nonconvex2x2):
        assert evaluate(AllocationMatrix((2, 2), (1, 1, 1, 1)), nonconvex2x2) == (17, 11)


class TestEpsCovers:
    def test_examples(self):
        one = ObjectivePoint(F(1), F(1))
        assert eps_covers(one, one, 0)
        assert eps_covers(one, ObjectivePoint(F(11, 10), F(1)), F(1, 10))
        assert not eps_covers(one, ObjectivePoint(F(12, 10), F(1)), F(1, 10))

    def test_negative(self):
        with pytest.raises(errors.NegativeEps):
            eps_covers((1, 1), (1, 1), -1)

    @given(*[st.fractions(0, 10, max_denominator=6)] * 4)
    def test_zero_eps_is_dominance(self, a, b, c, d):
        p, q = ObjectivePoint(a, b), ObjectivePoint(c, d)
        assert eps_covers(p, q, 0) == p.dominates(q)


class TestParetoFilter:
    def test_examples(self):
        pts = [((1, 1), 0), ((2, 0), 1), ((1, 0), 2)]
        assert set(pareto_filter(pts).points) == {(1, 1), (2, 0)}
        assert pareto_filter([((0, 0), 0)]).points == ((0, 0),)

    def test_tie_keeps_lowest_handle(self):
        ps = pareto_filter([((1, 1), 5), ((1, 1), 2), ((1, 1), 9)])
        assert ps.handles == (2,)

    def test_all_2x2_mechanisms(self):
        inst = Instance.independent(([1, 2], ["1/2", "1/2"]), ([1, 3], ["1/2", "1/2"]))
        cloud = [(evaluate(a, inst), k) for k, a in enumerate(enumerate_feasible(inst))]
        assert len(cloud) == 30
        front = set(pareto_filter(cloud).points)
        brute = {p for p, _ in cloud if not any(q.dominates(p) and q != p for q, _ in cloud)}
        assert front == brute

    @given(st.lists(st.tuples(*[st.fractions(0, 5, max_denominator=4)] * 2), max_size=25), st.randoms())
    def test_idempotent_and_order_independent(self, pts, rnd):
        items = [(p, k) for k, p in enumerate(pts)]
        first = pareto_filter(items)
        shuffled = items[:]
        rnd.shuffle(shuffled)
        assert pareto_filter(shuffled) == first
        assert pareto_filter(list(first)) == first
        # sorted by welfare ascending with strictly decreasing revenue
        for a, b in zip(first.points, first.points[1:]):
            assert a.welfare < b.welfare and a.revenue > b.revenue


@settings(max_examples=40, deadline=None)
@given(two_bidder_instances(max_size=2), st.fractions(F(1, 5), 7, max_denominator=5))
def test_feasible_properties(inst, c):
    scaled = inst.scaled(c)
    for a in enumerate_feasible(inst):
        p = evaluate(a, inst)
        assert p.welfare >= p.revenue >= 0
        assert evaluate(a, scaled) == (p.welfare * c, p.revenue * c)
        for w, pay, idx in zip(a.winners, threshold_payments(a, inst), a.tuples()):
            if w:
                assert pay in inst.marginals[w - 1].values
                assert pay <= inst.value(w, idx[w - 1])


def test_monotone_matches_definition():
    inst = Instance.independent(([1, 2], ["1/2", "1/2"]), ([1, 2, 3], ["1/3", "1/3", "1/3"]))
    for winners in itertools.product(range(3), repeat=6):
        a = AllocationMatrix((2, 3), winners)
        ok = True
        for (i, j), w in zip(a.tuples(), winners):
            if w == 1 and any(a[(k, j)] != 1 for k in range(i, 2)):
                ok = False
            if w == 2 and any(a[(i, k)] != 2 for k in range(j, 3)):
                ok = False
        assert is_monotone(a, inst) == ok
