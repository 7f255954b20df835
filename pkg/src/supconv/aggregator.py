"""Aggregate production function ``F = F_1 (+) ... (+) F_J`` and optimal allocations.

Engines
-------
brute_force
    Grid search over the simplex decomposition, any technologies.
exact_envelope_2d
    Upper concave hull of the firms' simplex graphs (two inputs, concave).
envelope_pairwise_2d
    Exact envelope for two possibly non-concave piecewise-linear firms.
sandwich
    Two-sided bounds from the grid pricing LP (concave, any dimension).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .convexcore import (
    CORNER,
    HullPolyline,
    default_resolution,
    hull_from_arrays,
    majorization_slack,
    price_lp,
)
from .convexcore.pricing import check_concave_interior
from .errors import CapabilityError, GridCapError, InputError, NonConcaveError
from .simplexgeom import grid_size, simplex_counts, simplex_grid
from .technology import Technology, common_dim

ENGINES = ("auto", "brute", "exact2d", "pairwise", "sandwich")
BRUTE_CAP = 10**8
_TIE_TOL = 1e-12


def worker_count() -> int:
    """Worker threads for grid searches, capped by ``SUPCONV_THREADS``."""
    try:
        cap = int(os.environ.get("SUPCONV_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else n)


@dataclass(frozen=True, eq=False)
class AllocationPlan:
    """Optimal split of ``total`` across firms, in simplex form.

    Firm ``j`` receives ``weights[j] * |total|_1 * firm_points[j]``.
    Firms with zero weight sit at the simplex barycenter.
    """

    weights: np.ndarray
    firm_points: np.ndarray
    total: np.ndarray
    value: float

    @property
    def active(self) -> list[int]:
        """0-based indices of firms with positive weight."""
        return [int(j) for j in np.nonzero(self.weights > 0)[0]]

    @property
    def n_active(self) -> int:
        return len(self.active)

    def firm_inputs(self) -> np.ndarray:
        """``(J, N)`` input vectors actually assigned to each firm."""
        return self.weights[:, None] * self.firm_points * float(self.total.sum())

    def check(self, techs: Sequence[Technology]) -> None:
        """Raise ``AssertionError`` unless the plan invariants hold."""
        a, P, x = self.weights, self.firm_points, self.total
        s = float(x.sum())
        assert np.all(a >= 0), "negative firm weight"
        assert abs(a.sum() - 1.0) <= 1e-10, "weights do not sum to 1"
        assert np.all(P >= 0) and np.allclose(P.sum(axis=1), 1.0, atol=1e-10), "firm point off simplex"
        if s > 0:
            assert np.abs(a @ P - x / s).max() <= 1e-8, "plan does not add up to the total"
        value = s * sum(a[j] * float(techs[j].evaluate_simplex(P[j][None, :])[0]) for j in range(len(techs)))
        assert abs(value - self.value) <= 1e-8 * max(1.0, abs(value)), "stored value is stale"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "total": self.total.tolist(),
            "weights": self.weights.tolist(),
            "firm_points": self.firm_points.tolist(),
            "active_firms": [j + 1 for j in self.active],
            "n_active": self.n_active,
        }


def make_plan(techs: Sequence[Technology], x, weights, points) -> AllocationPlan:
    """Assemble a plan, normalizing inputs and recomputing its value exactly."""
    J = len(techs)
    n = common_dim(techs)
    x = np.asarray(x, dtype=float)
    a = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    a[a < 1e-15] = 0.0
    a = a / a.sum()
    P = np.array(points, dtype=float).reshape(J, n)
    P = np.clip(P, 0.0, None)
    P = P / P.sum(axis=1, keepdims=True)
    P[a == 0] = 1.0 / n
    s = float(x.sum())
    value = s * sum(a[j] * float(techs[j].evaluate_simplex(P[j][None, :])[0]) for j in range(J) if a[j] > 0)
    for arr in (a, P):
        arr.setflags(write=False)
    return AllocationPlan(a, P, x.copy(), float(value))


def _zero_plan(techs, x) -> AllocationPlan:
    J, n = len(techs), common_dim(techs)
    return make_plan(techs, x, np.full(J, 1.0 / J), np.full((J, n), 1.0 / n))


def merge_points(techs, x, firms, masses, points) -> AllocationPlan:
    """Plan from labeled simplex points: pool each firm's points at their barycenter.

    ``masses`` are nonnegative and ``masses @ points == x / |x|_1``; by
    concavity pooling never lowers the value.
    """
    J, n = len(techs), common_dim(techs)
    a = np.zeros(J)
    P = np.zeros((J, n))
    for f, m, p in zip(firms, masses, points):
        if m <= 0:
            continue
        if f == CORNER:
            # zero-output corner: attach to the lowest firm that produces 0 there
            f = 0
        a[f] += m
        P[f] += m * np.asarray(p, dtype=float)
    nz = a > 0
    P[nz] /= a[nz, None]
    P[~nz] = 1.0 / n
    return make_plan(techs, x, a, P)


def _prepare(techs, x):
    techs = list(techs)
    n = common_dim(techs)
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"dimension mismatch: expected {n} inputs")
    if np.any(np.isnan(x)) or np.any(x < 0) or np.any(np.isinf(x)):
        raise InputError("inputs must be finite and nonnegative")
    return techs, n, x


# ---------------------------------------------------------------------------
# brute force


class _Best:
    """Running argmax with lexicographic tie-break on (alpha, x_1, ..., x_J)."""

    def __init__(self):
        self.values: list[np.ndarray] = []
        self.keys: list[np.ndarray] = []

    def offer(self, values: np.ndarray, key_fn) -> None:
        if values.size == 0:
            return
        top = values.max()
        if not np.isfinite(top):
            return
        idx = np.nonzero(values >= top - _TIE_TOL * max(1.0, abs(top)))[0]
        self.values.append(values[idx])
        self.keys.append(key_fn(idx))

    def result(self):
        values = np.concatenate(self.values)
        keys = np.vstack(self.keys)
        top = values.max()
        tied = np.nonzero(values >= top - _TIE_TOL * max(1.0, abs(top)))[0]
        order = np.lexsort(keys[tied].T[::-1])
        i = tied[order[0]]
        return float(values[i]), keys[i]


def _keys(J, n, subset, alphas, pts):
    """Full (alpha over J, points over J) key rows for candidates on ``subset``."""
    m = alphas.shape[0]
    A = np.zeros((m, J))
    P = np.full((m, J, n), 1.0 / n)
    for i, j in enumerate(subset):
        A[:, j] = alphas[:, i]
        active = alphas[:, i] > 0
        P[active, j, :] = pts[active, i, :]
    return np.hstack([A, P.reshape(m, J * n)])


def _pairs_2d(vals, t, xt, subset, J, best: _Best):
    a, b = subset
    fa, fb = vals[a], vals[b]
    for left, right, la, lb in ((fa, fb, a, b), (fb, fa, b, a)):
        L = np.nonzero(t <= xt)[0]
        R = np.nonzero(t >= xt)[0]
        tl, tr = t[L][:, None], t[R][None, :]
        den = tr - tl
        with np.errstate(divide="ignore", invalid="ignore"):
            wl = np.where(den > 0, (tr - xt) / den, np.nan)
        v = wl * left[L][:, None] + (1.0 - wl) * right[R][None, :]
        v = np.where(den > 0, v, -np.inf).ravel()

        def key_fn(idx, L=L, R=R, wl=wl, la=la, lb=lb):
            il, ir = np.unravel_index(idx, (L.size, R.size))
            alph = np.column_stack([wl[il, ir], 1.0 - wl[il, ir]])
            pts = np.stack([np.column_stack([t[L[il]], 1 - t[L[il]]]),
                            np.column_stack([t[R[ir]], 1 - t[R[ir]]])], axis=1)
            return _keys(J, 2, (la, lb), alph, pts)

        best.offer(v, key_fn)


def _full_subset_nd(vals, pts, xbar, subset, J, best: _Best, chunk=200_000):
    # every firm in the subset takes a candidate point; weights solve the system
    n = xbar.size
    G = pts.shape[0]
    total = G ** n
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.array(np.unravel_index(flat, (G,) * n)).T  # (m, n)
        M = np.transpose(pts[idx], (0, 2, 1))  # columns are the chosen points
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-12
        if not np.any(ok):
            continue
        alph = np.full((flat.size, n), np.nan)
        alph[ok] = np.linalg.solve(M[ok], np.broadcast_to(xbar, (int(ok.sum()), n))[..., None])[..., 0]
        good = ok & np.all(alph >= -1e-12, axis=1)
        alph = np.clip(alph, 0.0, None)
        v = np.full(flat.size, -np.inf)
        sel = np.nonzero(good)[0]
        v[sel] = sum(alph[sel, i] * vals[subset[i]][idx[sel, i]] for i in range(n))

        def key_fn(k, idx=idx, alph=alph):
            return _keys(J, n, subset, alph[k], pts[idx[k]])

        best.offer(v, key_fn)


def _residual_subset(techs, vals, pts, xbar, subset, J, k, best: _Best):
    # s < N firms: weights on a grid, last firm's point solved exactly
    s = len(subset)
    n = xbar.size
    W = simplex_counts(s, k) / k
    W = W[np.all(W > 0, axis=1)]
    G = pts.shape[0]
    last = techs[subset[-1]]
    for w in W:
        idx = np.array(np.unravel_index(np.arange(G ** (s - 1)), (G,) * (s - 1))).T
        chosen = pts[idx]  # (m, s-1, n)
        q = (xbar - np.einsum("i,mij->mj", w[:-1], chosen)) / w[-1]
        good = np.all(q >= -1e-12, axis=1)
        q = np.clip(q, 0.0, None)
        qs = q.sum(axis=1)
        good &= qs > 0
        v = np.full(idx.shape[0], -np.inf)
        sel = np.nonzero(good)[0]
        qn = q[sel] / qs[sel, None]
        v[sel] = sum(w[i] * vals[subset[i]][idx[sel, i]] for i in range(s - 1)) + w[-1] * last.evaluate_simplex(qn)

        def key_fn(kk, idx=idx, chosen=chosen, q=q, qs=qs, w=w):
            m = kk.size
            alph = np.broadcast_to(w, (m, s))
            allpts = np.concatenate([chosen[kk], (q[kk] / qs[kk, None])[:, None, :]], axis=1)
            return _keys(J, n, subset, alph, allpts)

        best.offer(v, key_fn)


def brute_force_count(J: int, n: int, k: int) -> int:
    """Number of candidate combinations :func:`brute_force` would examine."""
    G = grid_size(n, k) + 1
    count = J
    for s in range(2, min(n, J) + 1):
        if s == n:
            count += _comb(J, s) * G ** s
        else:
            count += _comb(J, s) * _comb(k - 1, s - 1) * G ** (s - 1)
    return count


def _comb(a, b):
    from math import comb

    return comb(a, b) if 0 <= b <= a else 0


def brute_force(techs: Sequence[Technology], x, k: int = 200, cap: int = BRUTE_CAP) -> AllocationPlan:
    """Maximize ``sum_j alpha_j F_j(x_j)`` subject to ``sum_j alpha_j x_j = x / |x|_1``.

    Candidate firm points are the simplex grid of resolution ``k`` plus the
    target direction itself. For fixed points the best weights sit at a
    vertex of an ``N``-row LP, so only firm subsets of size at most ``N``
    are searched: with ``N`` firms the weights follow from the points; with
    fewer, weights run over a grid and the last firm's point is solved for.
    Every candidate is an exactly evaluated feasible allocation, so the
    result is a lower bound on the aggregate output. Ties are broken by the
    lexicographically smallest ``(alpha, x_1, ..., x_J)``.
    """
    techs, n, x = _prepare(techs, x)
    J = len(techs)
    s = float(x.sum())
    if s == 0:
        return _zero_plan(techs, x)
    count = brute_force_count(J, n, k)
    if count > cap:
        raise GridCapError(f"brute force would examine {count} combinations (cap {cap})")
    xbar = x / s
    pts = np.vstack([simplex_grid(n, k), xbar])
    vals = [tech.evaluate_simplex(pts) for tech in techs]

    best = _Best()
    single = np.array([float(tech.evaluate_simplex(xbar[None, :])[0]) for tech in techs])
    best.offer(single, lambda idx: np.vstack([
        _keys(J, n, (j,), np.ones((1, 1)), xbar[None, None, :]) for j in idx]))

    subsets = [S for size in range(2, min(n, J) + 1) for S in combinations(range(J), size)]

    def work(S):
        local = _Best()
        if n == 2:
            _pairs_2d(vals, pts[:, 0], xbar[0], S, J, local)
        elif len(S) == n:
            _full_subset_nd(vals, pts, xbar, S, J, local)
        else:
            _residual_subset(techs, vals, pts, xbar, S, J, k, local)
        return local

    workers = min(worker_count(), max(1, len(subsets)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            partials = list(pool.map(work, subsets))
    else:
        partials = [work(S) for S in subsets]
    for part in partials:
        best.values.extend(part.values)
        best.keys.extend(part.keys)

    _, key = best.result()
    return make_plan(techs, x, key[:J], key[J:].reshape(J, n))


# ---------------------------------------------------------------------------
# two-input envelopes


@dataclass(frozen=True, eq=False)
class Envelope2D:
    """Aggregate of concave two-input firms as a labeled concave polyline on the simplex."""

    techs: tuple[Technology, ...]
    hull: HullPolyline
    resolution: int

    def on_simplex(self, t):
        return self.hull(t)

    def plan(self, x) -> AllocationPlan:
        """Optimal allocation at ``x`` read off the hull segment above it."""
        techs, _, x = _prepare(self.techs, x)
        s = float(x.sum())
        if s == 0:
            return _zero_plan(techs, x)
        t = x[0] / s
        h = self.hull
        k = h.segment(t)
        t0, t1 = h.t[k], h.t[k + 1]
        lam = 0.0 if t1 == t0 else (t1 - t) / (t1 - t0)
        lam = min(max(lam, 0.0), 1.0)
        p0, p1 = (t0, 1 - t0), (t1, 1 - t1)
        return merge_points(techs, x, [h.firms[k], h.firms[k + 1]], [lam, 1 - lam], [p0, p1])

    def value(self, x) -> float:
        return self.plan(x).value

    def mixing_segments(self) -> list[dict]:
        """Hull segments bridging two different firms: the linear regions of ``F``."""
        h = self.hull
        out = []
        for k in range(len(h) - 1):
            a, b = int(h.firms[k]), int(h.firms[k + 1])
            if a != b and CORNER not in (a, b):
                out.append({
                    "t_left": float(h.t[k]), "t_right": float(h.t[k + 1]),
                    "y_left": float(h.y[k]), "y_right": float(h.y[k + 1]),
                    "firm_left": a + 1, "firm_right": b + 1,
                })
        return out


def _require_2d(techs, what):
    n = common_dim(techs)
    if n != 2:
        raise CapabilityError(f"{what} needs exactly 2 inputs, got {n}")


def exact_envelope_2d(techs: Sequence[Technology], k: int | None = None) -> Envelope2D:
    """Upper concave hull of the firms' graphs on the 2-input simplex.

    Polyhedral firms contribute their exact breakpoints; smooth firms are
    sampled at ``k + 1`` evenly spaced shares. Exact for all-polyhedral
    input.
    """
    techs = tuple(techs)
    _require_2d(techs, "exact_envelope_2d")
    bad = [j + 1 for j, tech in enumerate(techs) if not tech.concave]
    if bad:
        raise NonConcaveError(
            f"firm {', '.join(map(str, bad))} not concave; use envelope_pairwise_2d or brute_force"
        )
    k = default_resolution(2) if k is None else int(k)
    ts, ys, fs = [], [], []
    grid = np.linspace(0.0, 1.0, k + 1)
    for j, tech in enumerate(techs):
        verts = tech.simplex_vertices()
        t = verts[:, 0] if verts is not None else grid
        ts.append(t)
        ys.append(tech.evaluate_simplex(np.column_stack([t, 1.0 - t])))
        fs.append(np.full(t.size, j))
    hull = hull_from_arrays(np.concatenate(ts), np.concatenate(ys), np.concatenate(fs))
    return Envelope2D(techs, _relabel_zero_vertices(techs, hull), k)


def _relabel_zero_vertices(techs, hull: HullPolyline) -> HullPolyline:
    # A zero-output vertex belongs to every firm producing nothing there;
    # credit it to its neighbour's firm so it never fakes a mixing segment.
    firms = hull.firms.copy()
    for k in range(len(hull)):
        if hull.y[k] != 0.0:
            continue
        nb = k + 1 if k == 0 else k - 1
        f = int(firms[nb])
        if f != CORNER and techs[f].evaluate_simplex([[hull.t[k], 1.0 - hull.t[k]]])[0] == 0.0:
            firms[k] = f
    return HullPolyline(hull.t, hull.y, firms)


@dataclass(frozen=True, eq=False)
class PairwiseEnvelope:
    """Exact aggregate of two piecewise-linear firms on the 2-input simplex.

    ``breaks`` partitions ``[0, 1]``; on each piece one candidate segment is
    on top. A candidate is either one firm's own linear piece or a chord
    from a breakpoint of one firm to a breakpoint of the other.
    """

    techs: tuple[Technology, ...]
    breaks: np.ndarray
    seg: np.ndarray  # (S, 4) rows t_left, y_left, t_right, y_right
    seg_firms: np.ndarray  # (S, 2) firm at left / right end
    winner: np.ndarray  # winning segment per piece

    def _seg_value(self, i, t):
        tl, yl, tr, yr = self.seg[i]
        return yl + (yr - yl) * (t - tl) / (tr - tl)

    def on_simplex(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape)
        flat = t.ravel()
        res = out.ravel()
        for m, ti in enumerate(flat):
            res[m] = self._at(float(ti))[0]
        return res.reshape(t.shape) if t.shape else float(res[0])

    def _at(self, t):
        k = int(np.searchsorted(self.breaks, t, side="right")) - 1
        k = min(max(k, 0), self.winner.size - 1)
        cands = [k]
        if t == self.breaks[k] and k > 0:
            cands.append(k - 1)
        vals = [(self._seg_value(self.winner[c], t), -c) for c in cands]
        v, c = max(vals)
        return v, self.winner[-c]

    def plan(self, x) -> AllocationPlan:
        techs, _, x = _prepare(self.techs, x)
        s = float(x.sum())
        if s == 0:
            return _zero_plan(techs, x)
        t = x[0] / s
        _, i = self._at(t)
        tl, _, tr, _ = self.seg[i]
        fl, fr = self.seg_firms[i]
        if fl == fr:
            return merge_points(techs, x, [fl], [1.0], [(t, 1 - t)])
        lam = (tr - t) / (tr - tl)
        return merge_points(techs, x, [fl, fr], [lam, 1 - lam], [(tl, 1 - tl), (tr, 1 - tr)])

    def value(self, x) -> float:
        return self.plan(x).value

    def vertices(self, tol: float = 1e-10) -> list[tuple[float, float]]:
        """Corner points of the envelope, collinear and duplicate breaks removed."""
        ts = self.breaks
        ys = np.array([float(self.on_simplex(b)) for b in ts])
        keep = [0]
        for m in range(1, ts.size - 1):
            t0, y0 = ts[keep[-1]], ys[keep[-1]]
            if ts[m] - t0 <= 1e-12:
                continue
            chord = y0 + (ys[m + 1] - y0) * (ts[m] - t0) / (ts[m + 1] - t0)
            if abs(ys[m] - chord) > tol:
                keep.append(m)
        keep.append(ts.size - 1)
        return [(float(ts[m]), float(ys[m])) for m in keep]


def envelope_pairwise_2d(techs: Sequence[Technology]) -> PairwiseEnvelope:
    """Exact ``F_1 (+) F_2`` for two piecewise-linear firms, concave or not.

    The optimal decomposition at any share either gives everything to one
    firm or mixes one point of each graph; along a linear piece the mixed
    value is monotone in each point, so optimal chords join breakpoints.
    The envelope of all such chords and both graphs is computed exactly.
    """
    techs = tuple(techs)
    if len(techs) != 2:
        raise CapabilityError(f"envelope_pairwise_2d needs exactly 2 firms, got {len(techs)}")
    _require_2d(techs, "envelope_pairwise_2d")
    verts = []
    for tech in techs:
        v = tech.simplex_vertices()
        if v is None:
            raise CapabilityError("envelope_pairwise_2d needs piecewise-linear firms")
        t = np.unique(v[:, 0])
        verts.append((t, tech.evaluate_simplex(np.column_stack([t, 1 - t]))))

    rows, firms = [], []
    for j, (t, y) in enumerate(verts):
        for m in range(t.size - 1):
            rows.append((t[m], y[m], t[m + 1], y[m + 1]))
            firms.append((j, j))
    (t1, y1), (t2, y2) = verts
    for a in range(t1.size):
        for b in range(t2.size):
            if t1[a] < t2[b]:
                rows.append((t1[a], y1[a], t2[b], y2[b]))
                firms.append((0, 1))
            elif t2[b] < t1[a]:
                rows.append((t2[b], y2[b], t1[a], y1[a]))
                firms.append((1, 0))
    seg = np.array(rows)
    seg_firms = np.array(firms, dtype=int)

    # critical shares: segment ends and pairwise crossings
    crit = [seg[:, 0], seg[:, 2]]
    slope = (seg[:, 3] - seg[:, 1]) / (seg[:, 2] - seg[:, 0])
    icpt = seg[:, 1] - slope * seg[:, 0]
    i, j = np.triu_indices(seg.shape[0], 1)
    ds = slope[i] - slope[j]
    nz = np.abs(ds) > 1e-15
    tc = (icpt[j][nz] - icpt[i][nz]) / ds[nz]
    lo = np.maximum(np.maximum(seg[i[nz], 0], seg[j[nz], 0]), 0.0)
    hi = np.minimum(np.minimum(seg[i[nz], 2], seg[j[nz], 2]), 1.0)
    crit.append(tc[(tc >= lo) & (tc <= hi)])
    breaks = np.unique(np.clip(np.concatenate(crit), 0.0, 1.0))

    mids = 0.5 * (breaks[:-1] + breaks[1:])
    cover = (seg[None, :, 0] <= mids[:, None]) & (seg[None, :, 2] >= mids[:, None])
    val = icpt[None, :] + slope[None, :] * mids[:, None]
    val = np.where(cover, val, -np.inf)
    winner = np.argmax(val, axis=1)
    return PairwiseEnvelope(techs, breaks, seg, seg_firms, winner)


# ---------------------------------------------------------------------------
# sandwich bounds


@dataclass(frozen=True, eq=False)
class SandwichResult:
    """Certified interval ``lower <= F(x) <= upper``.

    ``lower`` is the exact value of ``plan``; ``upper`` is
    ``price @ x + slack * |x|_1`` where ``slack`` bounds how far any firm
    rises above the price plane anywhere on the simplex.
    """

    lower: float
    upper: float
    price: np.ndarray
    plan: AllocationPlan
    slack: float
    lp_value: float
    resolution: int

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "price": self.price.tolist(),
            "slack": self.slack,
            "resolution": self.resolution,
            "plan": self.plan.to_dict(),
        }


def grid_lower(techs, x, k: int | None = None):
    """Best pooled plan from the grid pricing LP (no interiority check)."""
    techs, n, x = _prepare(techs, x)
    if float(x.sum()) == 0:
        return _zero_plan(techs, x), None
    gp = price_lp(techs, x, k)
    s = float(x.sum())
    plan = merge_points(techs, x, gp.firms, gp.weights / s, gp.points)
    return plan, gp


def sandwich(techs: Sequence[Technology], x, k: int | None = None) -> SandwichResult:
    """Bracket ``F(x)`` for concave firms at an interior ``x``."""
    techs, n, x = _prepare(techs, x)
    check_concave_interior(techs, x)
    k = default_resolution(n) if k is None else int(k)
    plan, gp = grid_lower(techs, x, k)
    slack = max(majorization_slack(techs, gp.price), 0.0)
    s = float(x.sum())
    upper = float(gp.price @ x) + slack * s
    lower = max(plan.value, 0.0)
    return SandwichResult(lower, max(upper, lower), gp.price, plan, slack, gp.value, k)


# ---------------------------------------------------------------------------
# dispatch


def auto_engine(techs: Sequence[Technology]) -> str:
    """Engine chosen by ``engine="auto"``."""
    techs = list(techs)
    n = common_dim(techs)
    concave = all(t.concave for t in techs)
    if n == 2 and concave:
        return "exact2d"
    if n == 2 and len(techs) == 2 and all(t.polyhedral for t in techs):
        return "pairwise"
    return "brute"


def aggregate(techs: Sequence[Technology], x, engine: str = "auto", k: int | None = None) -> AllocationPlan:
    """Optimal allocation of ``x`` across ``techs`` using the named engine."""
    techs = list(techs)
    if engine not in ENGINES:
        raise CapabilityError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    if engine == "auto":
        engine = auto_engine(techs)
    if engine == "exact2d":
        return exact_envelope_2d(techs, k).plan(x)
    if engine == "pairwise":
        return envelope_pairwise_2d(techs).plan(x)
    if engine == "sandwich":
        return sandwich(techs, x, k).plan
    return brute_force(techs, x, 200 if k is None else k)


class AggregateFunction:
    """Callable ``F(x)`` backed by the best engine for the instance.

    Envelopes are built once and reused, which matters when ``F`` is
    queried many times.
    """

    def __init__(self, techs: Sequence[Technology], engine: str = "auto", k: int | None = None):
        self.techs = list(techs)
        self.engine = auto_engine(self.techs) if engine == "auto" else engine
        self.k = k
        self._env = None
        if self.engine == "exact2d":
            self._env = exact_envelope_2d(self.techs, k)
        elif self.engine == "pairwise":
            self._env = envelope_pairwise_2d(self.techs)

    def plan(self, x) -> AllocationPlan:
        if self._env is not None:
            return self._env.plan(x)
        if self.engine == "sandwich":
            return grid_lower(self.techs, x, self.k)[0]
        return brute_force(self.techs, x, 200 if self.k is None else self.k)

    def __call__(self, x) -> float:
        return self.plan(x).value
