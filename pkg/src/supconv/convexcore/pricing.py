"""Support prices of aggregate technologies from a discretized simplex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from ..errors import BoundaryPointError, InputError, NonConcaveError, NumericalError
from ..simplexgeom import simplex_grid
from ..technology import Technology, common_dim
from .lp import OPTIMAL, LinearProgram, solve_lp


def default_resolution(n: int) -> int:
    """Default simplex resolution: 512 for two inputs, 64 otherwise."""
    return 512 if n == 2 else 64


def candidate_points(techs: Sequence[Technology], k: int):
    """Simplex grid plus every polyhedral firm's exact vertices.

    Returns ``(V, f, firms)`` where ``f[i] = max_j F_j(V[i])`` and
    ``firms[i]`` is the lowest index attaining it.
    """
    n = common_dim(techs)
    blocks = [simplex_grid(n, k)]
    for tech in techs:
        verts = tech.simplex_vertices()
        if verts is not None:
            blocks.append(verts)
    V = np.vstack(blocks)
    vals = np.column_stack([tech.evaluate_simplex(V) for tech in techs])
    firms = np.argmax(vals, axis=1)
    return V, vals[np.arange(V.shape[0]), firms], firms


@dataclass(frozen=True, eq=False)
class GridPrice:
    """Solution of the grid pricing LP at one input vector.

    ``price @ x == value`` and ``price @ v >= max_j F_j(v)`` on every
    candidate point ``v``. The optimal combination ``weights @ points == x``
    uses at most ``N`` candidate points, each attributed to ``firms[i]``.
    """

    price: np.ndarray
    value: float
    points: np.ndarray
    weights: np.ndarray
    firms: np.ndarray
    resolution: int


def price_lp(techs: Sequence[Technology], x, k: int | None = None) -> GridPrice:
    """Solve ``min w @ x  s.t.  w @ v >= max_j F_j(v)`` over candidate points.

    The LP is solved in its dual form ``max f @ mu  s.t.  V.T @ mu = x,
    mu >= 0`` (``N`` rows), whose shadow prices are ``w``. No concavity or
    interiority is assumed here; see :func:`support_price`.
    """
    n = common_dim(techs)
    x = np.asarray(x, dtype=float)
    if x.shape != (n,) or np.any(x < 0) or not np.all(np.isfinite(x)):
        raise InputError(f"x must be a nonnegative {n}-vector")
    scale = float(x.sum())
    if scale == 0:
        raise InputError("price_lp: zero input vector")
    k = default_resolution(n) if k is None else int(k)
    V, f, firms = candidate_points(techs, k)
    lp = LinearProgram(c=f, A=V.T, b=x / scale, senses=["=="] * n, maximize=True)
    res = solve_lp(lp)
    if res.status != OPTIMAL:
        raise NumericalError(f"pricing LP ended {res.status}")
    support = np.nonzero(res.x > 1e-13)[0]
    return GridPrice(
        price=res.dual.copy(),
        value=res.value * scale,
        points=V[support],
        weights=res.x[support] * scale,
        firms=firms[support],
        resolution=k,
    )


def check_concave_interior(techs: Sequence[Technology], x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    bad = [j + 1 for j, t in enumerate(techs) if not t.concave]
    if bad:
        raise NonConcaveError(f"non-concave technology present (firm {', '.join(map(str, bad))})")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise BoundaryPointError(
            "boundary point: supergradient not guaranteed "
            "(strictly positive input required)"
        )
    return x


def support_price(techs: Sequence[Technology], x, k: int | None = None) -> np.ndarray:
    """Supergradient of the aggregate technology at an interior point ``x``.

    >>> fig3 = [Technology.leontief([2, .5]), Technology.leontief([1, 1]),
    ...         Technology.leontief([.5, 2])]
    >>> np.round(support_price(fig3, [0.35, 0.65]), 6).tolist()
    [0.666667, 0.333333]
    """
    x = check_concave_interior(techs, x)
    return price_lp(techs, x, k).price


def _max_excess_2d(tech: Technology, w: np.ndarray) -> float:
    def excess(t):
        return float(tech.evaluate_simplex([[t, 1.0 - t]])[0] - (w[0] * t + w[1] * (1.0 - t)))

    ts = np.linspace(0.0, 1.0, 2049)
    vals = tech.evaluate_simplex(np.column_stack([ts, 1.0 - ts])) - (ts * w[0] + (1 - ts) * w[1])
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    res = minimize_scalar(lambda t: -excess(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return max(float(vals[i]), -float(res.fun), excess(lo), excess(hi))


def _max_excess_nd(tech: Technology, w: np.ndarray) -> float:
    n = tech.dim
    G = simplex_grid(n, 64 if n == 3 else 16)
    vals = tech.evaluate_simplex(G) - G @ w
    i = int(np.argmax(vals))

    def neg(v):
        v = np.maximum(v, 0.0)
        s = v.sum()
        return -(float(tech.evaluate_simplex((v / s)[None, :])[0]) - float(v / s @ w))

    res = minimize(neg, G[i], method="SLSQP", bounds=[(0.0, 1.0)] * n,
                   constraints=[{"type": "eq", "fun": lambda v: v.sum() - 1.0}],
                   options={"ftol": 1e-14, "maxiter": 500})
    return max(float(vals[i]), -float(res.fun))


def majorization_slack(techs: Sequence[Technology], w) -> float:
    """``sup`` over the simplex of ``max_j F_j(v) - w @ v``.

    With this slack ``d``, ``F(x) <= w @ x + d * |x|_1`` for every ``x``.
    Exact (vertex enumeration) for polyhedral firms; smooth firms
    use a dense start plus local maximization of the concave excess.
    """
    w = np.asarray(w, dtype=float)
    best = -np.inf
    for tech in techs:
        verts = tech.simplex_vertices()
        if verts is not None:
            best = max(best, float(np.max(tech.evaluate_simplex(verts) - verts @ w)))
        elif tech.dim == 2:
            best = max(best, _max_excess_2d(tech, w))
        else:
            best = max(best, _max_excess_nd(tech, w))
    return best
