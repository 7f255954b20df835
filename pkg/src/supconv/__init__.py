"""Sup-convolution of constant-returns-to-scale technologies."""

from .aggregator import (
    AggregateFunction,
    AllocationPlan,
    aggregate,
    brute_force,
    envelope_pairwise_2d,
    exact_envelope_2d,
    sandwich,
)
from .certify import flat_cone, inheritance_suite, profit_equivalence, profit_impossibility, sparsify
from .convexcore import support_price
from .scenario import Scenario, load_scenario
from .technology import Technology, evaluate, parse_technology

__version__ = "0.1.0"

__all__ = [
    "AggregateFunction",
    "AllocationPlan",
    "Scenario",
    "Technology",
    "aggregate",
    "brute_force",
    "envelope_pairwise_2d",
    "evaluate",
    "exact_envelope_2d",
    "flat_cone",
    "inheritance_suite",
    "load_scenario",
    "parse_technology",
    "profit_equivalence",
    "profit_impossibility",
    "sandwich",
    "sparsify",
    "support_price",
]
