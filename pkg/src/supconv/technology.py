"""Constant-returns-to-scale production technologies.

Every technology is homogeneous of degree one, so it is fully described by
its restriction to the unit simplex; values elsewhere come from
``F(x) = |x|_1 * F(x / |x|_1)`` with ``F(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import InputError

FAMILIES = ("cobb_douglas", "leontief", "linear", "ces", "pwl_simplex")

_SUM_TOL = 1e-12
_CONCAVITY_TOL = 1e-12


def _frozen(values, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: expected a list of numbers") from exc
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name}: expected a non-empty vector")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Technology:
    """One firm's production function.

    Use the family constructors (:meth:`cobb_douglas`, :meth:`leontief`,
    :meth:`linear`, :meth:`ces`, :meth:`pwl_simplex`) or
    :func:`parse_technology` rather than building instances directly.

    Attributes
    ----------
    family : str
        One of :data:`FAMILIES`.
    coef : numpy.ndarray or None
        Exponents (cobb_douglas), multipliers ``a`` with
        ``F = min_n a_n x_n`` (leontief), unit values (linear) or weights
        (ces).
    rho : float or None
        CES substitution parameter, ``rho < 1`` and ``rho != 0``.
    points : numpy.ndarray or None
        ``(K, 2)`` breakpoints ``(t, y)`` of a 2-input function on the
        simplex, where ``t`` is the first input share.
    concave, monotone : bool
        Derived shape flags.
    """

    family: str
    coef: np.ndarray | None = None
    rho: float | None = None
    points: np.ndarray | None = None
    concave: bool = True
    monotone: bool = True
    _dim: int = field(default=0, repr=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def cobb_douglas(cls, alpha) -> "Technology":
        alpha = _frozen(alpha, "alpha")
        if alpha.size < 2:
            raise InputError("alpha: need at least 2 inputs")
        if np.any(alpha < 0):
            raise InputError("alpha: exponents must be >= 0")
        if abs(alpha.sum() - 1.0) > _SUM_TOL:
            raise InputError("alpha: exponents must sum to 1")
        return cls("cobb_douglas", coef=alpha, _dim=alpha.size)

    @classmethod
    def leontief(cls, a) -> "Technology":
        a = _frozen(a, "a")
        if a.size < 2:
            raise InputError("a: need at least 2 inputs")
        if np.any(a <= 0):
            raise InputError("a: coefficients must be strictly positive")
        return cls("leontief", coef=a, _dim=a.size)

    @classmethod
    def linear(cls, v) -> "Technology":
        v = _frozen(v, "v")
        if v.size < 2:
            raise InputError("v: need at least 2 inputs")
        if np.any(v < 0):
            raise InputError("v: unit values must be >= 0")
        return cls("linear", coef=v, _dim=v.size)

    @classmethod
    def ces(cls, weights, rho: float) -> "Technology":
        weights = _frozen(weights, "weights")
        if weights.size < 2:
            raise InputError("weights: need at least 2 inputs")
        if np.any(weights <= 0):
            raise InputError("weights: must be strictly positive")
        try:
            rho = float(rho)
        except (TypeError, ValueError) as exc:
            raise InputError("rho: expected a number") from exc
        if not np.isfinite(rho) or rho >= 1 or rho == 0:
            raise InputError("rho: must satisfy rho < 1 and rho != 0")
        return cls("ces", coef=weights, rho=rho, _dim=weights.size)

    @classmethod
    def pwl_simplex(cls, points) -> "Technology":
        try:
            pts = np.array(points, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError("points: expected a list of [t, y] pairs") from exc
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InputError("points: expected at least two [t, y] pairs")
        if not np.all(np.isfinite(pts)):
            raise InputError("points: values must be finite")
        t, y = pts[:, 0], pts[:, 1]
        if t[0] != 0.0 or t[-1] != 1.0:
            raise InputError("points: first t must be 0 and last t must be 1")
        if np.any(np.diff(t) <= 0):
            raise InputError("points: t must be strictly increasing")
        if np.any(y < 0):
            raise InputError("points: y must be >= 0")
        pts.setflags(write=False)
        slopes = np.diff(y) / np.diff(t)
        concave = bool(np.all(np.diff(slopes) <= _CONCAVITY_TOL * (1 + np.abs(slopes[1:]))))
        # A piece y = c + s t extends homogeneously to c*x2 + (c+s)*x1, so
        # monotonicity needs the extended line nonnegative at t=0 and t=1.
        at0 = y[:-1] - slopes * t[:-1]
        at1 = at0 + slopes
        monotone = bool(np.all(at0 >= -1e-12) and np.all(at1 >= -1e-12))
        return cls("pwl_simplex", points=pts, concave=concave, monotone=monotone, _dim=2)

    # -- properties -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def polyhedral(self) -> bool:
        """True if the simplex restriction is piecewise linear."""
        return self.family in ("leontief", "linear", "pwl_simplex")

    def simplex_vertices(self) -> np.ndarray | None:
        """Points of the simplex whose lifted graph points generate the hypograph.

        Only defined for concave polyhedral families: the hypograph of the
        simplex restriction is the convex hull of these points (at their
        function values) and the simplex at height zero. For pwl_simplex the
        breakpoints are returned even when not concave. Smooth families
        return ``None``.
        """
        n = self.dim
        if self.family == "linear":
            return np.eye(n)
        if self.family == "leontief":
            apex = 1.0 / self.coef
            apex = apex / apex.sum()
            return np.vstack([np.eye(n), apex])
        if self.family == "pwl_simplex":
            t = self.points[:, 0]
            return np.column_stack([t, 1.0 - t])
        return None

    # -- evaluation -------------------------------------------------------

    def _on_simplex(self, P: np.ndarray) -> np.ndarray:
        # P: (M, N) rows with unit l1 norm (pwl) or any nonnegative rows
        # (closed-form families, which are homogeneous as written).
        fam = self.family
        if fam == "linear":
            return P @ self.coef
        if fam == "leontief":
            return np.min(P * self.coef, axis=1)
        if fam == "cobb_douglas":
            active = self.coef > 0
            sub = P[:, active]
            out = np.zeros(P.shape[0])
            ok = np.all(sub > 0, axis=1)
            if np.any(ok):
                out[ok] = np.exp(np.log(sub[ok]) @ self.coef[active])
            return out
        if fam == "ces":
            rho = self.rho
            out = np.zeros(P.shape[0])
            if rho < 0:
                ok = np.all(P > 0, axis=1)
            else:
                ok = np.any(P > 0, axis=1)
            if np.any(ok):
                with np.errstate(divide="ignore", over="ignore"):
                    inner = np.power(P[ok], rho) @ self.coef
                out[ok] = np.power(inner, 1.0 / rho)
            return out
        if fam == "pwl_simplex":
            return np.interp(P[:, 0], self.points[:, 0], self.points[:, 1])
        raise AssertionError(fam)

    def evaluate_simplex(self, P) -> np.ndarray:
        """Vectorized evaluation at rows of ``P`` assumed to lie on the simplex."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return self._on_simplex(P)

    def evaluate_many(self, X) -> np.ndarray:
        """Vectorized :func:`evaluate` over the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_inputs(X, self.dim)
        scale = X.sum(axis=1)
        out = np.zeros(X.shape[0])
        nz = scale > 0
        if np.any(nz):
            P = X[nz] / scale[nz, None]
            out[nz] = scale[nz] * self._on_simplex(P)
        return out

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def to_record(self) -> dict[str, Any]:
        """Config record that :func:`parse_technology` maps back to ``self``."""
        if self.family == "cobb_douglas":
            return {"family": "cobb_douglas", "alpha": self.coef.tolist()}
        if self.family == "leontief":
            return {"family": "leontief", "a": self.coef.tolist()}
        if self.family == "linear":
            return {"family": "linear", "v": self.coef.tolist()}
        if self.family == "ces":
            return {"family": "ces", "weights": self.coef.tolist(), "rho": self.rho}
        return {"family": "pwl_simplex", "points": self.points.tolist()}


def _check_inputs(X: np.ndarray, dim: int) -> None:
    if X.shape[-1] != dim:
        raise InputError(f"dimension mismatch: expected {dim} inputs, got {X.shape[-1]}")
    if np.any(np.isnan(X)):
        raise InputError("input contains NaN")
    if np.any(X < 0):
        raise InputError("inputs must be nonnegative")
    if np.any(np.isinf(X)):
        raise InputError("inputs must be finite")


def evaluate(tech: Technology, x) -> float:
    """Output of ``tech`` at the input vector ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("x must be a vector")
    _check_inputs(x, tech.dim)
    scale = float(x.sum())
    if scale == 0.0:
        return 0.0
    return scale * float(tech._on_simplex((x / scale)[None, :])[0])


_FIELDS = {
    "cobb_douglas": ("alpha",),
    "leontief": ("a",),
    "linear": ("v",),
    "ces": ("weights", "rho"),
    "pwl_simplex": ("points",),
}


def parse_technology(record: Mapping[str, Any]) -> Technology:
    """Build a validated :class:`Technology` from a config record.

    >>> parse_technology({"family": "cobb_douglas", "alpha": [0.5, 0.5]}).concave
    True
    """
    if not isinstance(record, Mapping):
        raise InputError("technology record must be an object")
    family = record.get("family")
    if family not in _FIELDS:
        raise InputError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    missing = [f for f in _FIELDS[family] if f not in record]
    if missing:
        raise InputError(f"{family}: missing field(s) {', '.join(missing)}")
    if family == "cobb_douglas":
        return Technology.cobb_douglas(record["alpha"])
    if family == "leontief":
        return Technology.leontief(record["a"])
    if family == "linear":
        return Technology.linear(record["v"])
    if family == "ces":
        return Technology.ces(record["weights"], record["rho"])
    return Technology.pwl_simplex(record["points"])


def common_dim(techs) -> int:
    """Shared input dimension of a non-empty technology list."""
    techs = list(techs)
    if not techs:
        raise InputError("need at least one technology")
    dims = {t.dim for t in techs}
    if len(dims) != 1:
        raise InputError(f"technologies disagree on dimension: {sorted(dims)}")
    return dims.pop()
