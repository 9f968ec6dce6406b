from fractions import Fraction as F

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pareto_auction.estimators import (
    LambdaAuction,
    MyersonAuction,
    ParetoFrontier,
    VickreyAuction,
    check_bids,
    check_instance,
)
from pareto_auction.oracle import oracle_pareto


def test_check_instance(nonconvex2x2):
    assert check_instance(nonconvex2x2) is nonconvex2x2
    assert check_instance(nonconvex2x2.to_dict()) == nonconvex2x2
    with pytest.raises(TypeError):
        check_instance([1, 2])


def test_check_bids(nonconvex2x2):
    assert check_bids([[11, 2], [20, 5]], nonconvex2x2).tolist() == [[0, 0], [1, 1]]
    assert check_bids(["20", "2"], nonconvex2x2).tolist() == [[1, 0]]
    with pytest.raises(ValueError, match="support"):
        check_bids([[12, 2]], nonconvex2x2)
    with pytest.raises(ValueError, match="entries"):
        check_bids([[11]], nonconvex2x2)


def test_params_roundtrip():
    est = LambdaAuction(lam="1/2")
    assert est.get_params() == {"lam": "1/2"}
    est.set_params(lam=3)
    assert clone(est).lam == 3


def test_vickrey_estimator(nonconvex2x2):
    est = VickreyAuction().fit(nonconvex2x2)
    assert est.predict([[11, 2], [20, 5]]).tolist() == [1, 1]
    pay = est.transform([[11, 5], [20, 2]])
    # bidder 1 wins everywhere, so it pays its lowest support value
    assert pay.dtype == object and list(pay) == [F(11), F(11)]
    assert est.score() == 17


def test_myerson_and_lambda(nonconvex2x2):
    assert MyersonAuction().fit(nonconvex2x2).objectives_.revenue == F(130, 9)
    assert LambdaAuction(lam=0).fit(nonconvex2x2).objectives_ == MyersonAuction().fit(nonconvex2x2).objectives_


def test_not_fitted():
    with pytest.raises(NotFittedError):
        VickreyAuction().predict([[1, 1]])
    with pytest.raises(NotFittedError):
        ParetoFrontier().transform()


def test_frontier(nonconvex2x2):
    exact = ParetoFrontier().fit(nonconvex2x2)
    assert tuple(map(tuple, exact.transform())) == oracle_pareto(nonconvex2x2).points
    assert exact.predict([0, 15, 17, 18]) == [F(130, 9), F(41, 3), F(11), None]
    approx = ParetoFrontier(eps="1/10").fit(nonconvex2x2)
    assert approx.transform().shape[1] == 2
    assert all(isinstance(x, F) for x in np.ravel(approx.transform()))
