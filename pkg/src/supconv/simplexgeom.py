"""Unit l1-simplex geometry and finitely generated cones."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import nnls

from .errors import GridCapError, InputError

DEFAULT_GRID_CAP = 10**7


def project(x) -> tuple[float, np.ndarray]:
    """Split ``x >= 0, x != 0`` into its l1 norm and its simplex direction.

    >>> project([0.3, 0.9])[0]
    1.2
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise InputError("project: inputs must be nonnegative")
    scale = float(x.sum())
    if scale == 0.0:
        raise InputError("project: zero vector has no simplex direction")
    return scale, x / scale


def grid_size(n: int, k: int) -> int:
    """Number of points of :func:`simplex_grid` for dimension ``n``, resolution ``k``."""
    return comb(k + n - 1, n - 1)


def _compositions(n: int, k: int) -> np.ndarray:
    # all nonnegative integer n-vectors summing to k, lexicographic ascending
    if n == 1:
        return np.array([[k]], dtype=np.int64)
    blocks = []
    for first in range(k + 1):
        rest = _compositions(n - 1, k - first)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def simplex_counts(n: int, k: int, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Integer numerators of :func:`simplex_grid` (rows sum to ``k``)."""
    if n < 2:
        raise InputError("simplex grid needs dimension >= 2")
    if k < 1:
        raise InputError("simplex grid needs resolution >= 1")
    size = grid_size(n, k)
    if size > cap:
        raise GridCapError(f"simplex grid of {size} points exceeds cap {cap}")
    return _compositions(n, k)


def simplex_grid(n: int, k: int, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """All points of the simplex with coordinates in ``{0, 1/k, ..., 1}``.

    Rows are in lexicographic ascending order, so ``simplex_grid(2, 2)`` is
    ``[[0, 1], [0.5, 0.5], [1, 0]]``.
    """
    return simplex_counts(n, k, cap) / k


@dataclass(frozen=True, eq=False)
class ConeRegion:
    """Convex cone generated by finitely many nonnegative rays."""

    rays: np.ndarray

    def __post_init__(self):
        rays = np.atleast_2d(np.asarray(self.rays, dtype=float))
        if rays.size == 0:
            raise InputError("cone needs at least one ray")
        if np.any(rays < 0) or np.any(~np.isfinite(rays)):
            raise InputError("cone rays must be finite and nonnegative")
        norms = rays.sum(axis=1)
        if np.any(norms == 0):
            raise InputError("cone rays must be nonzero")
        # deduplicate up to positive scaling, keeping first occurrence
        dirs = rays / norms[:, None]
        keep: list[int] = []
        for i, d in enumerate(dirs):
            if not any(np.allclose(d, dirs[j], rtol=0, atol=1e-12) for j in keep):
                keep.append(i)
        rays = rays[keep]
        rays.setflags(write=False)
        object.__setattr__(self, "rays", rays)

    @property
    def dim(self) -> int:
        return self.rays.shape[1]


def cone_contains(cone: ConeRegion, x, tol: float | None = None) -> bool:
    """Whether ``x`` is a nonnegative combination of the cone's rays.

    The combination is found by nonnegative least squares; membership is
    declared when its l1 residual is within ``tol`` (default
    ``1e-8 * (1 + |x|_1)``).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (cone.dim,):
        raise InputError(f"dimension mismatch: cone has {cone.dim} inputs, x has {x.shape}")
    if tol is None:
        tol = 1e-8 * (1.0 + np.abs(x).sum())
    beta, _ = nnls(cone.rays.T, x)
    return bool(np.abs(x - cone.rays.T @ beta).sum() <= tol)
