"""scikit-learn style wrappers.

``fit`` takes an :class:`Instance` (or its JSON dict) and designs the
mechanism; ``predict`` runs it on bid profiles, one row per auction, and
returns the winner (0 for no sale). ``transform`` returns the payments.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .classic import lambda_optimal, myerson, vickrey
from .exact_dp import dp_pareto
from .fptas import eps_pareto
from .model import Instance, Mechanism, ObjectivePoint, to_fraction, validate_instance


def check_instance(X: Any) -> Instance:
    if isinstance(X, Instance):
        return X
    if isinstance(X, dict):
        return validate_instance(X)
    raise TypeError(f"expected an Instance or an instance dict, got {type(X).__name__}")


def check_bids(bids: Any, inst: Instance) -> np.ndarray:
    """Map bid profiles to support indices, shape ``(n_samples, n_bidders)``.

    Each bid must be a support value of its bidder.
    """
    rows = list(bids)
    if rows and not isinstance(rows[0], (list, tuple, np.ndarray)):
        rows = [rows]
    out = np.empty((len(rows), inst.n), dtype=np.int64)
    lookup = [{v: k for k, v in enumerate(m.values)} for m in inst.marginals]
    for s, row in enumerate(rows):
        row = list(row)
        if len(row) != inst.n:
            raise ValueError(f"bid profile {s} has {len(row)} entries, expected {inst.n}")
        for b, x in enumerate(row):
            v = to_fraction(x) if not isinstance(x, Fraction) else x
            if v not in lookup[b]:
                raise ValueError(f"bid {x} is not in bidder {b + 1}'s support")
            out[s, b] = lookup[b][v]
    return out


class _MechanismEstimator(BaseEstimator):
    def _design(self, inst: Instance) -> Mechanism:  # pragma: no cover - abstract
        raise NotImplementedError

    def fit(self, X, y=None):
        self.instance_ = check_instance(X)
        self.mechanism_ = self._design(self.instance_)
        self.objectives_ = self.mechanism_.objectives
        return self

    def predict(self, bids) -> np.ndarray:
        check_is_fitted(self, "mechanism_")
        idx = check_bids(bids, self.instance_)
        a = self.mechanism_.allocation
        return np.array([a[tuple(row)] for row in idx.tolist()], dtype=np.int64)

    def transform(self, bids) -> np.ndarray:
        check_is_fitted(self, "mechanism_")
        idx = check_bids(bids, self.instance_)
        a, pay = self.mechanism_.allocation, self.mechanism_.payments
        return np.array([pay[a.flat(row)] for row in idx.tolist()], dtype=object)

    def score(self, X=None, y=None) -> Fraction:
        """Expected welfare of the fitted mechanism."""
        check_is_fitted(self, "mechanism_")
        return self.objectives_.welfare


class VickreyAuction(_MechanismEstimator):
    def _design(self, inst):
        return vickrey(inst)


class MyersonAuction(_MechanismEstimator):
    def _design(self, inst):
        return myerson(inst)


class LambdaAuction(_MechanismEstimator):
    """Maximizes ``revenue + lam * welfare``."""

    def __init__(self, lam: Any = 0):
        self.lam = lam

    def _design(self, inst):
        return lambda_optimal(inst, self.lam)


class ParetoFrontier(BaseEstimator):
    """Exact (``eps=None``) or eps-approximate Pareto set of a two-bidder instance.

    ``predict`` maps minimum-welfare requirements to the best revenue any
    frontier point offers (``None`` when no point meets the requirement).
    """

    def __init__(self, eps: Any = None):
        self.eps = eps

    def fit(self, X, y=None):
        inst = check_instance(X)
        self.instance_ = inst
        if self.eps is None:
            pairs = [(m, p) for p, m in dp_pareto(inst)]
        else:
            pairs = eps_pareto(inst, self.eps)
        self.mechanisms_ = [m for m, _ in pairs]
        self.points_ = [ObjectivePoint(*p) for _, p in pairs]
        return self

    def transform(self, X=None) -> np.ndarray:
        check_is_fitted(self, "points_")
        return np.array([[p.welfare, p.revenue] for p in self.points_], dtype=object).reshape(-1, 2)

    def predict(self, welfare_floor) -> list[Fraction | None]:
        check_is_fitted(self, "points_")
        out = []
        for w in np.atleast_1d(np.asarray(welfare_floor, dtype=object)).tolist():
            w = to_fraction(w) if not isinstance(w, Fraction) else w
            revs = [p.revenue for p in self.points_ if p.welfare >= w]
            out.append(max(revs) if revs else None)
        return out
