from fractions import Fraction as F

import pytest

from pareto_auction import errors
from pareto_auction.classic import vickrey
from pareto_auction.fptas import GapQuery, NoCertificate, eps_pareto, eps_pareto_size_bound, gap_query
from pareto_auction.generators import all_diagonals, diagonal_mechanism, gen_exponential_pareto
from pareto_auction.model import Instance, Mechanism, eps_covers, is_monotone, make_mechanism
from pareto_auction.oracle import objective_cloud, oracle_pareto

from conftest import random_instance


class TestGap:
    def test_vickrey_bound(self, nonconvex2x2):
        v = vickrey(nonconvex2x2)
        ans = gap_query(nonconvex2x2, v.objectives, F(1, 10))
        assert isinstance(ans, Mechanism)
        assert ans.objectives.dominates(v.objectives)

    def test_above_max_welfare(self, nonconvex2x2):
        b = (nonconvex2x2.max_welfare_bound() + 1, 1)
        assert isinstance(gap_query(nonconvex2x2, b, F(1, 2)), NoCertificate)

    def test_singleton(self, singleton):
        ans = gap_query(singleton, (2, 2), F(1, 10))
        assert ans.allocation.winners == (2,)

    def test_validation(self, nonconvex2x2, uniform12):
        with pytest.raises(errors.NonPositiveBound):
            GapQuery((0, 1), F(1, 10))
        with pytest.raises(errors.NonPositiveDelta):
            gap_query(nonconvex2x2, (1, 1), 0)
        with pytest.raises(errors.ArityError):
            gap_query(uniform12, (1, 1), F(1, 10))

    def test_soundness_random(self, rng):
        for _ in range(4):
            inst = random_instance(rng, 3, 3, correlated=rng.random() < 0.5)
            cloud = [p for p, _ in objective_cloud(inst)]
            top = inst.max_welfare_bound()
            for _ in range(15):
                b = (top * F(rng.randint(1, 40), 40), top * F(rng.randint(1, 40), 40))
                delta = F(1, rng.choice([2, 5, 10, 20]))
                ans = gap_query(inst, b, delta)
                if isinstance(ans, NoCertificate):
                    assert not any(p.welfare > (1 + delta) * b[0] and p.revenue > (1 + delta) * b[1] for p in cloud)
                else:
                    assert is_monotone(ans.allocation, inst)
                    assert make_mechanism(ans.allocation, inst).objectives.dominates(b)


class TestEpsPareto:
    def test_singleton_lift(self):
        inst = Instance.independent(([1], [1]), ([1], [1]))
        out = eps_pareto(inst, F(1, 10))
        assert any(eps_covers(p, (1, 1), F(1, 10)) for _, p in out)

    def test_nonconvex2x2(self, nonconvex2x2):
        eps = F(1, 20)
        out = eps_pareto(nonconvex2x2, eps)
        for q in oracle_pareto(nonconvex2x2).points:
            assert any(eps_covers(p, q, eps) for _, p in out)
        for m, p in out:
            assert make_mechanism(m.allocation, nonconvex2x2).objectives == p
        pts = [p for _, p in out]
        assert not any(a != b and a.dominates(b) for a in pts for b in pts)

    def test_exponential_family(self):
        gen = gen_exponential_pareto(4)
        eps = F(1, 10)
        out = eps_pareto(gen.instance, eps)
        assert len(out) <= eps_pareto_size_bound(gen.instance, eps)
        for xi in all_diagonals(4):
            q = make_mechanism(diagonal_mechanism(gen, xi), gen.instance).objectives
            assert any(eps_covers(p, q, eps) for _, p in out)

    def test_invalid_eps(self, nonconvex2x2):
        with pytest.raises(errors.NonPositiveEps):
            eps_pareto(nonconvex2x2, 0)
