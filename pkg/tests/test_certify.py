import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supconv.aggregator import aggregate, make_plan
from supconv.certify import (
    CheckReport,
    flat_cone,
    inheritance_suite,
    profit_equivalence,
    profit_impossibility,
    sparsify,
)
from supconv.convexcore import support_price
from supconv.errors import BoundaryPointError, NonConcaveError, SparsifyError
from supconv.simplexgeom import cone_contains
from supconv.technology import Technology

from conftest import FLAT_LEVEL, fig1_firms, fig2_firms, fig3_firms


def _same_rays(a, b, tol=1e-9):
    na = a / a.sum(axis=1, keepdims=True)
    nb = b / b.sum(axis=1, keepdims=True)
    return all(np.min(np.abs(nb - r).sum(axis=1)) <= tol for r in na) and len(na) == len(nb)


def test_flat_cone_fig2():
    cert = flat_cone(fig2_firms(), [0.5, 0.5])
    assert cert.valid
    np.testing.assert_allclose(cert.price, [FLAT_LEVEL] * 2, atol=1e-4)
    assert cert.max_abs_residual < 1e-3
    rays = cert.cone.rays / cert.cone.rays.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(sorted(rays[:, 0]), [1 / 3, 2 / 3], atol=2e-3)


def test_flat_cone_fig3():
    cert = flat_cone(fig3_firms(), [0.35, 0.65])
    assert cert.valid
    np.testing.assert_allclose(cert.price, [2 / 3, 1 / 3], atol=1e-9)
    assert _same_rays(cert.cone.rays, np.array([[0.2, 0.8], [0.5, 0.5]]))
    assert cone_contains(cert.cone, [0.35, 0.65])


def test_flat_cone_single_firm():
    cert = flat_cone([Technology.cobb_douglas([0.5, 0.5])], [0.5, 0.5])
    assert cert.valid
    assert cert.cone.rays.shape[0] == 1
    assert _same_rays(cert.cone.rays, np.array([[1.0, 1.0]]))


def test_flat_cone_scaling_invariance():
    a = flat_cone(fig3_firms(), [0.3, 0.6])
    b = flat_cone(fig3_firms(), [0.6, 1.2])
    np.testing.assert_allclose(a.price, b.price, atol=1e-9)
    assert _same_rays(a.cone.rays, b.cone.rays)


def test_flat_cone_preconditions():
    with pytest.raises(BoundaryPointError, match="boundary point: supergradient not guaranteed"):
        flat_cone(fig2_firms(), [0, 1])
    with pytest.raises(NonConcaveError):
        flat_cone(fig1_firms(), [0.5, 0.5])


def test_flat_cone_deterministic():
    a = flat_cone(fig2_firms(), [0.4, 0.6], seed=7).to_dict()
    b = flat_cone(fig2_firms(), [0.4, 0.6], seed=7).to_dict()
    assert a == b


def test_support_price_examples():
    np.testing.assert_allclose(support_price(fig2_firms(), [0.5, 0.5]), [FLAT_LEVEL] * 2, atol=1e-4)
    np.testing.assert_allclose(support_price([Technology.linear([2, 3])], [0.3, 0.9]), [2, 3], atol=1e-12)
    np.testing.assert_allclose(support_price(fig3_firms(), [0.35, 0.65]), [2 / 3, 1 / 3], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 5.0))
def test_support_price_is_supergradient(t, scale):
    techs = fig3_firms()
    xbar = scale * np.array([t, 1 - t])
    w = support_price(techs, xbar)
    F = lambda z: aggregate(techs, z).value
    rng = np.random.default_rng(0)
    for z in rng.uniform(0, 3, (20, 2)):
        assert F(z) - F(xbar) <= w @ (z - xbar) + 1e-9


def test_profit_equivalence_fig2_both_optimal():
    techs = fig2_firms()
    plan = aggregate(techs, [0.5, 0.5])
    rep = profit_equivalence(techs, [FLAT_LEVEL] * 2, [0.5, 0.5], plan)
    assert rep.passed
    assert rep.details["aggregate_optimal"] and rep.details["individual_optimal"]


def test_profit_equivalence_dominated_prices():
    techs = [Technology.cobb_douglas([0.5, 0.5])]
    rep = profit_equivalence(techs, [2, 2], [0.5, 0.5])
    assert rep.passed
    assert not rep.details["aggregate_optimal"] and not rep.details["individual_optimal"]
    assert rep.residuals["aggregate_profit"] < 0
    assert rep.counterexample["kind"] == "shrink"
    zero = profit_equivalence(techs, [2, 2], [0.0, 0.0])
    assert zero.passed and zero.details["aggregate_optimal"]


def test_profit_equivalence_cheap_prices():
    techs = fig3_firms()
    rep = profit_equivalence(techs, [0.3, 0.3], [0.5, 0.5])
    assert rep.passed and not rep.details["aggregate_optimal"]
    assert rep.counterexample["kind"] == "direction"


def test_profit_impossibility_fig1():
    rep = profit_impossibility(fig1_firms(), [0.7, 0.3])
    assert rep.passed
    assert rep.details["expected"] == "negative"
    assert rep.residuals["value"] == pytest.approx(0.5, abs=1e-12)
    assert rep.residuals["hull_gap"] > 0.03
    assert all(w["kind"] in ("direction", "shrink") for w in rep.details["witnesses"])


def test_profit_impossibility_fails_where_supported():
    # at t=0.3 the fig1 aggregate sits on its concave majorant, so a price exists
    rep = profit_impossibility(fig1_firms(), [0.3, 0.7])
    assert not rep.passed
    assert rep.counterexample["kind"] == "supporting_price"


def test_inheritance_fig3():
    rep = inheritance_suite(fig3_firms(), trials=60)
    assert rep.passed and rep.details["skipped"] == []


def test_inheritance_fig1_flag_gated():
    rep = inheritance_suite(fig1_firms(), trials=40)
    assert rep.passed
    assert "concavity" in rep.details["skipped"]
    assert rep.residuals["homogeneity"] <= 1e-9
    assert rep.residuals["monotonicity"] <= rep.details["tolerance"] * 3


def test_inheritance_linear_exact():
    rep = inheritance_suite([Technology.linear([1, 2]), Technology.linear([3, 1])], trials=30)
    assert rep.passed
    assert rep.residuals["homogeneity"] <= 1e-12
    assert rep.residuals["superadditivity"] <= 1e-12


def test_failed_report_needs_counterexample():
    with pytest.raises(ValueError):
        CheckReport("x", "y", passed=False)


def test_sparsify_fig3_dense_plan():
    techs = fig3_firms()
    x = np.array([0.35, 0.65])
    eps = 1e-4
    pts = np.array([[0.2, 0.8], [0.5, 0.5], [0.35, 0.65]])
    a = np.array([0.5, 0.5, 0.0]) * (1 - eps) + np.array([0, 0, eps])
    dense = make_plan(techs, x, a, pts)
    assert dense.n_active == 3
    sparse = sparsify(techs, x, dense)
    assert sparse.n_active == 2
    assert sparse.value >= dense.value - 3e-3
    assert sparse.value == pytest.approx(0.45, abs=1e-12)
    sparse.check(techs)


def test_sparsify_identical_firms():
    cd = Technology.cobb_douglas([0.3, 0.7])
    techs = [cd] * 5
    x = np.array([0.6, 0.4])
    dense = make_plan(techs, x, np.full(5, 0.2), np.tile(x, (5, 1)))
    assert sparsify(techs, x, dense).n_active == 1


def test_sparsify_noop():
    techs = fig2_firms()
    plan = aggregate(techs, [0.5, 0.5])
    assert sparsify(techs, [0.5, 0.5], plan) is plan


def test_sparsify_unconverged_plan():
    techs = [Technology.linear([1, 0]), Technology.linear([0, 1]), Technology.linear([0.1, 0.1])]
    x = np.array([1.0, 1.0])
    fake = make_plan(techs, x, [1 / 3, 1 / 3, 1 / 3], [[1, 0], [0, 1], [0.5, 0.5]])
    # the fake plan is worse than optimal, so any subset beats it; raise the bar instead
    boosted = type(fake)(fake.weights, fake.firm_points, fake.total, fake.value + 1.0)
    with pytest.raises(SparsifyError):
        sparsify(techs, x, boosted)
