"""Convex-geometry and linear-programming kernels."""

from .hull import CORNER, HullPolyline, LabeledPoint, caratheodory_reduce, hull_from_arrays, upper_hull_2d
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LPResult, solve_lp
from .pricing import (
    GridPrice,
    candidate_points,
    default_resolution,
    majorization_slack,
    price_lp,
    support_price,
)

__all__ = [
    "CORNER",
    "GridPrice",
    "HullPolyline",
    "INFEASIBLE",
    "LPResult",
    "LabeledPoint",
    "LinearProgram",
    "OPTIMAL",
    "UNBOUNDED",
    "candidate_points",
    "caratheodory_reduce",
    "default_resolution",
    "hull_from_arrays",
    "majorization_slack",
    "price_lp",
    "solve_lp",
    "support_price",
    "upper_hull_2d",
]
