"""Upper concave hulls on the 2-input simplex and Caratheodory reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError

CORNER = -1  # label of the (0, 0) / (1, 0) augmentation points
_HULL_TOL = 1e-10


@dataclass(frozen=True)
class LabeledPoint:
    """A point ``(x, y)`` of some firm's simplex hypograph.

    ``firm`` is a 0-based firm index, or :data:`CORNER` for the zero-output
    corner points that belong to every hypograph.
    """

    x: tuple[float, ...]
    y: float
    firm: int

    @property
    def t(self) -> float:
        return self.x[0]


@dataclass(frozen=True, eq=False)
class HullPolyline:
    """Concave piecewise-linear function on ``[0, 1]`` given by its vertices."""

    t: np.ndarray
    y: np.ndarray
    firms: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.t, self.y)

    def __len__(self) -> int:
        return self.t.size

    def vertices(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.y.tolist()))

    def segment(self, t: float) -> int:
        """Index ``k`` of the segment ``[t_k, t_{k+1}]`` containing ``t``."""
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        return min(max(k, 0), self.t.size - 2)

    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.t)


def hull_from_arrays(t, y, firms=None, tol: float = _HULL_TOL) -> HullPolyline:
    """Array form of :func:`upper_hull_2d`."""
    t = np.asarray(t, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if firms is None:
        firms = np.zeros(t.size, dtype=int)
    firms = np.asarray(firms, dtype=int).ravel()
    if not (t.size == y.size == firms.size):
        raise InputError("t, y and firms must have equal length")
    if np.any((t < 0) | (t > 1)) or not np.all(np.isfinite(y)):
        raise InputError("hull points need t in [0, 1] and finite y")
    if np.unique(t).size < 2:
        raise InputError("hull needs at least two distinct t values")

    t = np.concatenate([t, [0.0, 1.0]])
    y = np.concatenate([y, [0.0, 0.0]])
    firms = np.concatenate([firms, [CORNER, CORNER]])
    # Sort by t, then y descending, then firm index with corners last, so
    # the first entry per distinct t is the one kept.
    firm_key = np.where(firms == CORNER, np.iinfo(np.int64).max, firms)
    order = np.lexsort((firm_key, -y, t))
    t, y, firms = t[order], y[order], firms[order]
    first = np.concatenate([[True], t[1:] != t[:-1]])
    t, y, firms = t[first], y[first], firms[first]

    ht: list[float] = []
    hy: list[float] = []
    hf: list[int] = []
    for ti, yi, fi in zip(t.tolist(), y.tolist(), firms.tolist()):
        while len(ht) >= 2:
            t0, y0, t1, y1 = ht[-2], hy[-2], ht[-1], hy[-1]
            chord = y0 + (yi - y0) * (t1 - t0) / (ti - t0)
            if y1 - chord <= tol:
                ht.pop()
                hy.pop()
                hf.pop()
            else:
                break
        ht.append(ti)
        hy.append(yi)
        hf.append(fi)
    return HullPolyline(np.array(ht), np.array(hy), np.array(hf, dtype=int))


def upper_hull_2d(points: Sequence[LabeledPoint], tol: float = _HULL_TOL) -> HullPolyline:
    """Least concave majorant of labeled points over ``t`` in ``[0, 1]``.

    The corners ``(0, 0)`` and ``(1, 0)`` are added since they lie in every
    simplex hypograph. Interior vertices within ``tol`` of the chord through
    their neighbours are dropped, so consecutive slopes strictly decrease.
    """
    t = [p.t for p in points]
    y = [p.y for p in points]
    f = [p.firm for p in points]
    return hull_from_arrays(t, y, f, tol)


def caratheodory_reduce(points, weights, target=None, tol: float = 1e-9) -> np.ndarray:
    """Shrink a convex combination to affinely independent support.

    ``points`` is a ``(P, D)`` array (or a list of :class:`LabeledPoint`,
    lifted to ``(x..., y)``) and ``weights`` a probability vector with
    ``weights @ points == target``. Returns new weights reproducing the same
    target with at most ``rank`` positive entries, where ``rank`` is the
    affine dimension plus one of the support (``N + 1`` for lifted simplex
    points). Null-space directions are removed one at a time, each step
    zeroing one weight.
    """
    if len(points) and isinstance(points[0], LabeledPoint):
        P = np.array([list(p.x) + [p.y] for p in points], dtype=float)
    else:
        P = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float).copy()
    if w.shape != (P.shape[0],):
        raise InputError("one weight per point required")
    if np.any(w < -tol) or abs(w.sum() - 1.0) > tol:
        raise InputError("weights must be a probability vector")
    target = w @ P if target is None else np.asarray(target, dtype=float)
    if np.abs(w @ P - target).max() > tol:
        raise InputError("weights do not represent the target")
    w = np.maximum(w, 0.0)

    while True:
        support = np.nonzero(w > 0)[0]
        M = np.vstack([P[support].T, np.ones(support.size)])
        _, s, vt = np.linalg.svd(M)
        rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
        if support.size <= rank:
            break
        c = vt[-1]
        if c.max() <= 0:
            c = -c
        pos = c > 1e-14
        ratios = np.full(support.size, np.inf)
        ratios[pos] = w[support][pos] / c[pos]
        k = int(np.argmin(ratios))
        w[support] -= ratios[k] * c
        w[support[k]] = 0.0
        w[w < 0] = 0.0
    w /= w.sum()
    if np.abs(w @ P - target).max() > 1e-8:
        raise InputError("reduction lost the target; input is ill-conditioned")
    return w
