"""Numerical certificates for linearity, profit maximization, inheritance and sparsity."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .aggregator import AggregateFunction, AllocationPlan, aggregate, brute_force, make_plan, sandwich
from .convexcore import OPTIMAL, LinearProgram, candidate_points, default_resolution, solve_lp
from .errors import CapabilityError, InputError, SparsifyError
from .simplexgeom import ConeRegion
from .technology import Technology, common_dim

EXACT_TOL = 1e-6
SAMPLED_TOL = 3e-3
GRID_TOL = 2e-3
SPARSIFY_MAX_FIRMS = 12


def default_tolerance(techs: Sequence[Technology]) -> float:
    """1e-6 when every firm is piecewise linear (exact engines), else 3e-3."""
    return EXACT_TOL if all(t.polyhedral for t in techs) else SAMPLED_TOL


@dataclass
class CheckReport:
    """Outcome of one named check. A failed check always carries a counterexample."""

    name: str
    instance: str
    passed: bool
    residuals: dict[str, Any] = field(default_factory=dict)
    counterexample: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.counterexample is None:
            raise ValueError(f"{self.name}: failed report needs a counterexample")

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.name,
            "instance": self.instance,
            "passed": self.passed,
            "residuals": self.residuals,
            "counterexample": self.counterexample,
            "details": self.details,
        }


@dataclass(frozen=True, eq=False)
class ConeCertificate:
    """Evidence that ``F(x) = price @ x`` on the cone spanned by a plan's firm inputs."""

    cone: ConeRegion
    price: np.ndarray
    samples_checked: int
    max_abs_residual: float
    ray_excess: np.ndarray
    ray_firms: tuple[int, ...]
    majorization_slack: float
    tolerance: float
    seed: int
    value: float

    @property
    def valid(self) -> bool:
        worst = max(self.max_abs_residual, float(self.ray_excess.max()), self.majorization_slack)
        return bool(worst <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "valid": self.valid,
            "price": self.price.tolist(),
            "rays": self.cone.rays.tolist(),
            "ray_firms": [j + 1 for j in self.ray_firms],
            "ray_excess": self.ray_excess.tolist(),
            "max_abs_residual": self.max_abs_residual,
            "majorization_slack": self.majorization_slack,
            "samples_checked": self.samples_checked,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "value": self.value,
        }


def _instance(techs) -> str:
    return ", ".join(t.family for t in techs)


def flat_cone(
    techs: Sequence[Technology],
    x,
    k: int | None = None,
    tol: float | None = None,
    samples: int = 128,
    seed: int = 0,
) -> ConeCertificate:
    """Certify that the aggregate is linear on the cone of an optimal plan at ``x``.

    The price is a supergradient from :func:`~supconv.aggregator.sandwich`
    and the rays are the firm inputs of its plan. Three things are checked
    against ``tol``: each firm earns zero profit on its own ray, the price
    plane majorizes every firm on the simplex, and ``|F(z) - price @ z|``
    at ``samples`` random nonnegative combinations ``z`` of the rays, with
    ``F`` from an independent engine. Residuals are absolute and scaled by
    ``max(1, |x|_1)``.
    """
    techs = list(techs)
    n = common_dim(techs)
    k = default_resolution(n) if k is None else int(k)
    x = np.asarray(x, dtype=float)
    tol = default_tolerance(techs) if tol is None else tol
    sw = sandwich(techs, x, k)
    w, plan = sw.price, sw.plan
    inputs = plan.firm_inputs()
    active = plan.active
    rays = inputs[active]
    excess = np.array([
        abs(techs[j].evaluate_many(inputs[j][None, :])[0] - float(inputs[j] @ w)) for j in active
    ])

    F = AggregateFunction(techs, "exact2d" if n == 2 else "sandwich", k)
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(0.0, 2.0, size=(samples, len(active)))
    Z = coeffs @ rays
    resid = max((abs(F(z) - float(z @ w)) for z in Z), default=0.0)
    scale = max(1.0, float(x.sum()))
    return ConeCertificate(
        cone=ConeRegion(rays),
        price=w,
        samples_checked=samples,
        max_abs_residual=float(resid) / scale,
        ray_excess=excess / scale,
        ray_firms=tuple(active),
        majorization_slack=sw.slack,
        tolerance=tol,
        seed=seed,
        value=sw.lower,
    )


def profit_equivalence(
    techs: Sequence[Technology],
    w,
    x_star,
    plan: AllocationPlan | None = None,
    k: int | None = None,
    tol: float = SAMPLED_TOL,
) -> CheckReport:
    """Compare aggregate and firm-level profit maximization at prices ``w``.

    With constant returns, maximal profit is 0 (or unbounded), so ``x``
    maximizes ``G(x) - w @ x`` iff ``G(v) <= w @ v`` for every simplex
    direction ``v`` and ``G(x) >= w @ x``. The aggregate side uses an
    independently computed ``F``; the firm side uses each ``F_j`` with the
    plan's firm inputs. The check passes when the two verdicts agree.
    """
    techs = list(techs)
    n = common_dim(techs)
    w = np.asarray(w, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    k = default_resolution(n) if k is None else int(k)
    F = AggregateFunction(techs, "auto", k)
    if plan is None:
        plan = F.plan(x_star)
    V, _, _ = candidate_points(techs, k)

    firm_excess, firm_profit = [], []
    firm_dir = []
    inputs = plan.firm_inputs()
    for j, tech in enumerate(techs):
        ex = tech.evaluate_simplex(V) - V @ w
        i = int(np.argmax(ex))
        firm_excess.append(float(ex[i]))
        firm_dir.append(V[i])
        firm_profit.append(float(tech.evaluate_many(inputs[j][None, :])[0] - inputs[j] @ w))
    firms_ok = [e <= tol and p >= -tol for e, p in zip(firm_excess, firm_profit)]
    individual_ok = all(firms_ok)

    agg_ex = np.array([F(v) for v in V]) - V @ w
    i = int(np.argmax(agg_ex))
    agg_excess = float(agg_ex[i])
    agg_profit = F(x_star) - float(x_star @ w)
    aggregate_ok = agg_excess <= tol and agg_profit >= -tol
    passed = aggregate_ok == individual_ok

    counter = None
    if not aggregate_ok or not passed:
        if agg_excess > tol:
            counter = {"kind": "direction", "direction": V[i].tolist(), "excess_profit": agg_excess}
        else:
            counter = {"kind": "shrink", "x": x_star.tolist(), "profit": agg_profit}
        if not individual_ok:
            j = firms_ok.index(False)
            counter["firm"] = j + 1
            counter["firm_direction"] = firm_dir[j].tolist()
            counter["firm_excess_profit"] = firm_excess[j]
            counter["firm_profit"] = firm_profit[j]
        if not passed:
            counter["disagreement"] = True
    return CheckReport(
        name="profit_equivalence",
        instance=_instance(techs),
        passed=passed,
        residuals={
            "aggregate_excess": agg_excess,
            "aggregate_profit": agg_profit,
            "firm_excess": firm_excess,
            "firm_profit": firm_profit,
        },
        counterexample=counter,
        details={
            "price": w.tolist(),
            "x": x_star.tolist(),
            "aggregate_optimal": aggregate_ok,
            "individual_optimal": individual_ok,
            "tolerance": tol,
        },
    )


def profit_impossibility(
    techs: Sequence[Technology],
    x,
    k: int | None = None,
    prices=None,
    n_random: int = 16,
    seed: int = 0,
    tol: float = SAMPLED_TOL,
) -> CheckReport:
    """Show that no input price makes ``x`` profit maximizing.

    The cheapest price plane over the aggregate's values on the candidate
    grid comes from an LP; if even it lies above ``F(x)`` by more than
    ``tol``, every price fails. Each tested price (the LP price plus
    ``n_random`` random ones, or ``prices``) is paired with a witness: a
    direction of positive excess profit, or, for prices majorizing ``F``,
    the negative profit at ``x`` itself (producing nothing does better).
    The report passes when impossibility is confirmed.
    """
    techs = list(techs)
    n = common_dim(techs)
    k = default_resolution(n) if k is None else int(k)
    x = np.asarray(x, dtype=float)
    s = float(x.sum())
    if s == 0:
        raise InputError("profit_impossibility needs a nonzero input")
    F = AggregateFunction(techs, "auto", k)
    V, _, _ = candidate_points(techs, k)
    Fv = np.array([F(v) for v in V])
    res = solve_lp(LinearProgram(c=Fv, A=V.T, b=x / s, senses=["=="] * n, maximize=True))
    if res.status != OPTIMAL:
        raise CapabilityError(f"impossibility LP ended {res.status}")
    hull_value = res.value * s
    fx = F(x)
    gap = hull_value - fx

    tested = [res.dual]
    if prices is not None:
        tested = [np.asarray(p, dtype=float) for p in np.atleast_2d(prices)]
    else:
        rng = np.random.default_rng(seed)
        top = 2.0 * max(float(np.abs(res.dual).max()), 1.0)
        tested += list(rng.uniform(0.0, top, size=(n_random, n)))
    witnesses = []
    for w in tested:
        ex = Fv - V @ w
        i = int(np.argmax(ex))
        profit = fx - float(x @ w)
        if ex[i] > tol:
            witnesses.append({"price": w.tolist(), "kind": "direction", "direction": V[i].tolist(),
                              "excess_profit": float(ex[i])})
        elif profit < -tol:
            witnesses.append({"price": w.tolist(), "kind": "shrink", "profit": profit})
        else:
            witnesses.append({"price": w.tolist(), "kind": "none"})
    impossible = gap > tol and all(wi["kind"] != "none" for wi in witnesses)
    counter = None
    if not impossible:
        ok = next((wi for wi in witnesses if wi["kind"] == "none"), witnesses[0])
        counter = {"kind": "supporting_price", "price": ok["price"], "hull_gap": gap}
    return CheckReport(
        name="profit_impossibility",
        instance=_instance(techs),
        passed=impossible,
        residuals={"hull_value": hull_value, "value": fx, "hull_gap": gap},
        counterexample=counter,
        details={"x": x.tolist(), "expected": "negative", "witnesses": witnesses, "tolerance": tol},
    )


def inheritance_suite(
    techs: Sequence[Technology],
    k: int = 200,
    trials: int = 200,
    seed: int = 0,
    tol: float = GRID_TOL,
) -> CheckReport:
    """Randomized checks that the aggregate inherits the firms' shape.

    ``F`` is evaluated by :func:`~supconv.aggregator.brute_force`, a lower
    bound within ``tol * |x|_1`` of the truth at the default resolution.
    Checks (residual > 0 means violation):

    * monotonicity: ``F(x) - F(y)`` for ``x <= y``, allowed ``tol * |y|_1``;
      only implied when every firm is monotone;
    * concavity: ``(F(x) + F(y)) / 2 - F((x + y) / 2)``, run only when every
      firm is concave;
    * homogeneity: ``|F(c x) - c F(x)|`` for ``c`` in ``{0.5, 2}``, allowed
      ``1e-9 * (1 + c F(x))``;
    * superadditivity: ``F(x) + F(y) - F(x + y)``, allowed ``3 tol |x + y|_1``;
      run only when every firm is concave, since each firm receives a single
      bundle and a non-concave firm need not be superadditive itself.
    """
    techs = list(techs)
    n = common_dim(techs)
    rng = np.random.default_rng(seed)

    def F(z):
        return brute_force(techs, z, k).value

    run_concavity = all(t.concave for t in techs)
    monotone_implied = all(t.monotone for t in techs)
    checks = ("monotonicity", "concavity", "homogeneity", "superadditivity")
    worst = dict.fromkeys(checks, -np.inf)
    margin = dict.fromkeys(checks, -np.inf)
    failures: dict[str, dict] = {}

    def record(check, resid, allowed, witness):
        worst[check] = max(worst[check], resid)
        margin[check] = max(margin[check], resid - allowed)
        if resid > allowed and check not in failures:
            failures[check] = {"check": check, "residual": resid, "allowed": allowed, **witness}

    for _ in range(trials):
        x = rng.uniform(0.0, 1.0, n) * rng.uniform(0.2, 2.0)
        y = x + rng.uniform(0.0, 0.5, n)
        fx, fy = F(x), F(y)
        record("monotonicity", fx - fy, tol * y.sum(), {"x": x.tolist(), "y": y.tolist()})
        if run_concavity:
            z = rng.uniform(0.0, 1.0, n) * rng.uniform(0.2, 2.0)
            fz = F(z)
            mid = 0.5 * (x + z)
            record("concavity", 0.5 * (fx + fz) - F(mid), tol * mid.sum(),
                   {"x": x.tolist(), "y": z.tolist()})
        for c in (0.5, 2.0):
            record("homogeneity", abs(F(c * x) - c * fx), 1e-9 * (1 + c * fx),
                   {"x": x.tolist(), "scale": c})
        if run_concavity:
            record("superadditivity", fx + fy - F(x + y), 3 * tol * (x + y).sum(),
                   {"x": x.tolist(), "y": y.tolist()})

    skipped = [] if run_concavity else ["concavity", "superadditivity"]
    if not monotone_implied and "monotonicity" in failures:
        # not a contradiction: inheritance needs monotone firms
        failures.pop("monotonicity")
    passed = not failures
    return CheckReport(
        name="inheritance",
        instance=_instance(techs),
        passed=passed,
        residuals={key: (None if key in skipped else float(v)) for key, v in worst.items()},
        counterexample=next(iter(failures.values())) if failures else None,
        details={
            "trials": trials,
            "seed": seed,
            "resolution": k,
            "tolerance": tol,
            "skipped": skipped,
            "worst_margin": {key: (None if key in skipped else float(v)) for key, v in margin.items()},
            "monotonicity_implied": monotone_implied,
        },
    )


def sparsify(
    techs: Sequence[Technology],
    x,
    plan: AllocationPlan,
    tol: float = SAMPLED_TOL,
    k: int | None = None,
) -> AllocationPlan:
    """Re-express ``plan`` using at most ``N`` operating firms.

    Firm subsets are tried by size, then lexicographically; the first whose
    own aggregate reaches ``plan.value - tol`` wins. A plan already using at
    most ``N`` firms is returned unchanged.
    """
    techs = list(techs)
    n = common_dim(techs)
    J = len(techs)
    if plan.n_active <= n:
        return plan
    if J > SPARSIFY_MAX_FIRMS:
        raise CapabilityError(f"sparsify enumerates subsets of at most {SPARSIFY_MAX_FIRMS} firms, got {J}")
    x = np.asarray(x, dtype=float)
    for size in range(1, n + 1):
        for S in combinations(range(J), size):
            sub = aggregate([techs[j] for j in S], x, "auto", k)
            if sub.value >= plan.value - tol:
                a = np.zeros(J)
                P = np.full((J, n), 1.0 / n)
                a[list(S)] = sub.weights
                P[list(S)] = sub.firm_points
                return make_plan(techs, x, a, P)
    raise SparsifyError(
        f"no subset of at most {n} firms reaches {plan.value:.9g} - {tol:g}; is the input plan converged?"
    )
