"""Small dense linear programs solved by a two-phase tableau simplex method.

Pricing is Dantzig's most-negative reduced cost; after a run of degenerate
pivots the solver switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InputError, NumericalError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-10
_DEGENERATE_STREAK = 50


@dataclass
class LinearProgram:
    """``min`` (or ``max``) ``c @ x`` subject to ``A @ x  (senses)  b`` and bounds.

    ``senses`` holds one of ``"<="``, ``">="``, ``"=="`` per row. ``bounds``
    holds one ``(lo, hi)`` pair per variable, ``None`` meaning unbounded; the
    default is ``x >= 0``.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: Sequence[str] | None = None
    bounds: Sequence[tuple[float | None, float | None]] | None = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.A.shape[0]
        if self.b.size != m:
            raise InputError(f"b has {self.b.size} entries for {m} rows")
        if self.senses is None:
            self.senses = ["<="] * m
        self.senses = list(self.senses)
        if len(self.senses) != m or any(s not in ("<=", ">=", "==") for s in self.senses):
            raise InputError("senses must give one of <=, >=, == per row")
        if self.bounds is None:
            self.bounds = [(0.0, None)] * n
        self.bounds = [tuple(bd) for bd in self.bounds]
        if len(self.bounds) != n:
            raise InputError(f"bounds has {len(self.bounds)} entries for {n} variables")
        for arr in (self.c, self.A, self.b):
            if not np.all(np.isfinite(arr)):
                raise InputError("LP data must be finite")


@dataclass
class LPResult:
    """Outcome of :func:`solve_lp`.

    ``dual[i]`` is the shadow price of row ``i``: the rate of change of the
    optimal value per unit increase of ``b[i]``.
    """

    status: str
    value: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    dual: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0


class _StandardForm:
    """``min c z, A z = b, z >= 0, b >= 0`` plus the map back to ``x = offset + T z``."""

    def __init__(self, lp: LinearProgram):
        n = lp.c.size
        cols: list[np.ndarray] = []
        offset = np.zeros(n)
        extra_rows: list[tuple[int, float]] = []  # (z column, upper bound)
        for i, (lo, hi) in enumerate(lp.bounds):
            lo = -np.inf if lo is None else float(lo)
            hi = np.inf if hi is None else float(hi)
            if lo > hi:
                raise InputError(f"variable {i}: lower bound exceeds upper bound")
            e = np.zeros(n)
            e[i] = 1.0
            if np.isfinite(lo):
                offset[i] = lo
                cols.append(e)
                if np.isfinite(hi):
                    extra_rows.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                offset[i] = hi
                cols.append(-e)
            else:
                cols.append(e)
                cols.append(-e)
        self.T = np.column_stack(cols) if cols else np.zeros((n, 0))
        self.offset = offset
        nz = self.T.shape[1]

        A = lp.A @ self.T
        b = lp.b - lp.A @ offset
        senses = list(lp.senses)
        for col, ub in extra_rows:
            row = np.zeros(nz)
            row[col] = 1.0
            A = np.vstack([A, row])
            b = np.append(b, ub)
            senses.append("<=")
        m = A.shape[0]
        self.m_orig = lp.A.shape[0]

        n_slack = sum(s != "==" for s in senses)
        S = np.zeros((m, n_slack))
        k = 0
        for r, s in enumerate(senses):
            if s == "<=":
                S[r, k] = 1.0
                k += 1
            elif s == ">=":
                S[r, k] = -1.0
                k += 1
        A = np.hstack([A, S])
        flip = np.where(b < 0, -1.0, 1.0)
        A *= flip[:, None]
        b = b * flip
        self.flip = flip

        # initial identity basis: a +1 slack where available, else an artificial
        n_cols = A.shape[1]
        init_cols = np.empty(m, dtype=int)
        art_rows = []
        for r in range(m):
            hit = np.nonzero((S[r] * flip[r]) == 1.0)[0]
            if hit.size:
                init_cols[r] = nz + hit[0]
            else:
                art_rows.append(r)
        n_art = len(art_rows)
        Art = np.zeros((m, n_art))
        for k, r in enumerate(art_rows):
            Art[r, k] = 1.0
            init_cols[r] = n_cols + k
        self.A = np.hstack([A, Art])
        self.b = b
        self.n_struct = nz
        self.n_real = n_cols
        self.n_art = n_art
        self.init_cols = init_cols
        sign = -1.0 if lp.maximize else 1.0
        self.c = np.zeros(self.A.shape[1])
        self.c[:nz] = sign * (lp.c @ self.T)
        self.sign = sign


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    tab -= np.outer(col_vals, tab[row])


def _run_simplex(tab, basis, cost, allowed, max_iter, iters):
    """Minimize ``cost`` over the tableau in place. Returns (status, iterations)."""
    degenerate = 0
    while True:
        if iters >= max_iter:
            raise NumericalError(f"simplex iteration limit {max_iter} exceeded")
        body = tab[:, :-1]
        reduced = cost - cost[basis] @ body
        scale = 1.0 + np.abs(cost).max(initial=0.0)
        candidates = np.nonzero(allowed & (reduced < -_COST_TOL * scale))[0]
        if candidates.size == 0:
            return OPTIMAL, iters
        bland = degenerate >= _DEGENERATE_STREAK
        col = candidates[0] if bland else candidates[np.argmin(reduced[candidates])]
        column = body[:, col]
        rows = np.nonzero(column > _PIVOT_TOL)[0]
        if rows.size == 0:
            return UNBOUNDED, iters
        ratios = tab[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        row = ties[np.argmin(basis[ties])]
        degenerate = degenerate + 1 if best <= 1e-12 else 0
        _pivot(tab, row, col)
        basis[row] = col
        iters += 1


def solve_lp(lp: LinearProgram, max_iter: int | None = None) -> LPResult:
    """Solve a small dense LP.

    Returns an :class:`LPResult` whose status is ``"optimal"``,
    ``"infeasible"`` or ``"unbounded"``. Raises :class:`NumericalError` when
    the iteration guard trips.
    """
    sf = _StandardForm(lp)
    m, ncols = sf.A.shape
    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000
    tab = np.hstack([sf.A, sf.b[:, None]])
    basis = sf.init_cols.copy()
    real = np.zeros(ncols, dtype=bool)
    real[: sf.n_real] = True
    iters = 0

    if sf.n_art:
        cost1 = np.zeros(ncols)
        cost1[sf.n_real:] = 1.0
        status, iters = _run_simplex(tab, basis, cost1, np.ones(ncols, dtype=bool), max_iter, iters)
        infeas = float(cost1[basis] @ tab[:, -1])
        if infeas > 1e-8 * (1.0 + np.abs(sf.b).sum()):
            return LPResult(INFEASIBLE, iterations=iters)
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if basis[r] >= sf.n_real:
                nzs = np.nonzero(np.abs(tab[r, : sf.n_real]) > _PIVOT_TOL)[0]
                if nzs.size:
                    _pivot(tab, r, nzs[0])
                    basis[r] = nzs[0]

    status, iters = _run_simplex(tab, basis, sf.c, real, max_iter, iters)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=iters)

    z = np.zeros(ncols)
    z[basis] = tab[:, -1]
    z = np.maximum(z, 0.0)
    x = sf.offset + sf.T @ z[: sf.n_struct]
    value = float(lp.c @ x)
    b_inv = tab[:, sf.init_cols]
    y = sf.c[basis] @ b_inv
    dual = (sf.sign * y * sf.flip)[: sf.m_orig]
    return LPResult(OPTIMAL, value, x, dual, iters)
