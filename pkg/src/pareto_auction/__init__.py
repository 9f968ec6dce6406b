"""Exact and approximate revenue/welfare Pareto curves for single-item auctions."""

from . import errors
from .classic import (
    RandomizedMechanism,
    iron,
    is_regular,
    lambda_optimal,
    lambda_sweep,
    myerson,
    randomized_tradeoff,
    vickrey,
    virtual_values,
)
from .estimators import LambdaAuction, MyersonAuction, ParetoFrontier, VickreyAuction, check_bids, check_instance
from .exact_dp import achievable_values, dp_pareto, exact_witness
from .fptas import GapQuery, NoCertificate, eps_pareto, gap_query
from .generators import (
    GeneratedInstance,
    gen_binary_partition,
    gen_exponential_pareto,
    gen_nonconvex,
    gen_partition_bicriterion,
    gen_partition_welfare,
)
from .matching import AuctionGraph, build_graph, enumerate_matchings, matching_to_mechanism
from .model import (
    AllocationMatrix,
    Instance,
    MarginalDistribution,
    Mechanism,
    ObjectivePoint,
    ParetoSet,
    eps_covers,
    evaluate,
    is_monotone,
    make_mechanism,
    pareto_filter,
    threshold_payments,
    validate_instance,
)
from .oracle import enumerate_feasible, objective_cloud, oracle_pareto

__version__ = "0.1.0"

__all__ = [
    "AllocationMatrix",
    "AuctionGraph",
    "GapQuery",
    "GeneratedInstance",
    "Instance",
    "LambdaAuction",
    "MarginalDistribution",
    "Mechanism",
    "MyersonAuction",
    "NoCertificate",
    "ObjectivePoint",
    "ParetoFrontier",
    "ParetoSet",
    "RandomizedMechanism",
    "VickreyAuction",
    "achievable_values",
    "build_graph",
    "check_bids",
    "check_instance",
    "dp_pareto",
    "enumerate_feasible",
    "enumerate_matchings",
    "eps_covers",
    "eps_pareto",
    "errors",
    "evaluate",
    "exact_witness",
    "gap_query",
    "gen_binary_partition",
    "gen_exponential_pareto",
    "gen_nonconvex",
    "gen_partition_bicriterion",
    "gen_partition_welfare",
    "iron",
    "is_monotone",
    "is_regular",
    "lambda_optimal",
    "lambda_sweep",
    "make_mechanism",
    "matching_to_mechanism",
    "myerson",
    "objective_cloud",
    "oracle_pareto",
    "pareto_filter",
    "randomized_tradeoff",
    "threshold_payments",
    "validate_instance",
    "vickrey",
    "virtual_values",
]
