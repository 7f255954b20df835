"""Command-line front end.

Usage::

    supconv <eval|aggregate|flat|figure|certify|sparsify> --scenario FILE [options]

Exit codes: 0 success, 2 input error, 3 capability mismatch, 4 precondition
violation, 5 numerical failure (including a certificate that did not verify).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import aggregator, certify
from .convexcore import support_price
from .errors import CapabilityError, InputError, NumericalError, PreconditionError
from .scenario import Scenario, load_scenario
from .technology import evaluate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPABILITY = 3
EXIT_PRECONDITION = 4
EXIT_NUMERICAL = 5

COMMANDS = ("eval", "aggregate", "flat", "figure", "certify", "sparsify")
_STROKES = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def fmt(value: float) -> str:
    """Nine significant digits, trailing zeros kept (``0.400000000``)."""
    value = float(value)
    if value == 0.0:
        return "0.000000000"
    return f"{value:#.9g}"


def _round(obj: Any) -> Any:
    """Round every float in a JSON-able tree to nine significant digits."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return None
        v = float(f"{v:.9g}")
        return 0.0 if v == 0 else v
    return obj


def to_json(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def parse_vector(text: str | None, n: int, what: str = "--x") -> np.ndarray:
    if text is None:
        raise InputError(f"{what} is required")
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if x.shape != (n,):
        raise InputError(f"{what}: expected {n} entries, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise InputError(f"{what}: entries must be finite and nonnegative")
    return x


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text)


def _probe(args, sc: Scenario) -> np.ndarray:
    if args.x is not None:
        return parse_vector(args.x, sc.dim)
    if sc.probe is not None:
        return np.array(sc.probe)
    return np.full(sc.dim, 1.0 / sc.dim)


def _resolution(args, sc: Scenario) -> int | None:
    return args.resolution if args.resolution is not None else sc.resolution


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, sc: Scenario) -> int:
    J = len(sc.firms)
    if args.firm is None:
        raise InputError("eval needs --firm J")
    if not 1 <= args.firm <= J:
        raise InputError(f"no such firm: {args.firm} (scenario has {J})")
    x = parse_vector(args.x, sc.dim)
    _emit(fmt(evaluate(sc.firms[args.firm - 1], x)) + "\n", args.out)
    return EXIT_OK


def cmd_aggregate(args, sc: Scenario) -> int:
    x = parse_vector(args.x, sc.dim)
    k = _resolution(args, sc)
    engine = aggregator.auto_engine(sc.firms) if args.engine == "auto" else args.engine
    record: dict[str, Any] = {"engine": engine}
    if engine == "sandwich":
        sw = aggregator.sandwich(sc.firms, x, k)
        plan = sw.plan
        record["bounds"] = {"lower": sw.lower, "upper": sw.upper, "gap": sw.gap}
    else:
        plan = aggregator.aggregate(sc.firms, x, engine, k)
    record.update(plan.to_dict())
    _emit(to_json(record), args.out)
    return EXIT_OK


def cmd_flat(args, sc: Scenario) -> int:
    x = _probe(args, sc)
    seed = sc.seed if args.seed is None else args.seed
    cert = certify.flat_cone(sc.firms, x, _resolution(args, sc), sc.tolerance, seed=seed)
    _emit(to_json({"x": x, **cert.to_dict()}), args.out)
    return EXIT_OK if cert.valid else EXIT_NUMERICAL


def figure_table(sc: Scenario, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid ``t``, firm values ``(K+1, J)`` and aggregate values on the 2-input simplex."""
    if sc.dim != 2:
        raise CapabilityError("figure emission is 2-input only")
    t = np.arange(k + 1) / k
    P = np.column_stack([t, 1.0 - t])
    firms = np.column_stack([tech.evaluate_simplex(P) for tech in sc.firms])
    F = aggregator.AggregateFunction(sc.firms, "auto", k)
    agg = np.array([F(p) for p in P])
    return t, firms, agg


def figure_csv(t, firms, agg) -> str:
    J = firms.shape[1]
    lines = [",".join(["t"] + [f"F_{j}" for j in range(1, J + 1)] + ["F"])]
    for i in range(t.size):
        lines.append(",".join(fmt(v) for v in (t[i], *firms[i], agg[i])))
    return "\n".join(lines) + "\n"


def figure_svg(t, firms, agg, width: int = 640, height: int = 400, pad: int = 40) -> str:
    top = max(float(firms.max()), float(agg.max()), 1e-12) * 1.05

    def path(y):
        pts = " ".join(
            f"{pad + ti * (width - 2 * pad):.2f},{height - pad - yi / top * (height - 2 * pad):.2f}"
            for ti, yi in zip(t, y)
        )
        return pts

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width - pad}" y="{height - pad / 3:.0f}" font-size="12">t</text>',
    ]
    for j in range(firms.shape[1]):
        color = _STROKES[j % len(_STROKES)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
                   f'points="{path(firms[:, j])}"><title>F_{j + 1}</title></polyline>')
    out.append(f'<polyline fill="none" stroke="black" stroke-width="3" stroke-dasharray="8 4" '
               f'points="{path(agg)}"><title>F</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_figure(args, sc: Scenario) -> int:
    if sc.dim != 2:
        raise CapabilityError("figure emission is 2-input only")
    k = _resolution(args, sc) or 512
    t, firms, agg = figure_table(sc, k)
    _emit(figure_csv(t, firms, agg), args.out)
    if args.svg is not None:
        Path(args.svg).write_text(figure_svg(t, firms, agg))
    return EXIT_OK


def sparsity_report(sc: Scenario, x, k, engine: str = "auto", tol: float = certify.SAMPLED_TOL):
    plan = aggregator.aggregate(sc.firms, x, engine, k)
    sparse = certify.sparsify(sc.firms, x, plan, tol, k)
    n = sc.dim
    passed = sparse.n_active <= n and sparse.value >= plan.value - tol
    counter = None
    if not passed:
        counter = {"x": list(map(float, x)), "n_active": sparse.n_active, "value": sparse.value}
    return plan, sparse, certify.CheckReport(
        name="sparsity",
        instance=", ".join(t.family for t in sc.firms),
        passed=passed,
        residuals={"value_loss": plan.value - sparse.value},
        counterexample=counter,
        details={"x": list(map(float, x)), "n_active_before": plan.n_active,
                 "n_active_after": sparse.n_active, "limit": n, "tolerance": tol},
    )


def cmd_sparsify(args, sc: Scenario) -> int:
    x = parse_vector(args.x, sc.dim) if args.x is not None else _probe(args, sc)
    plan, sparse, report = sparsity_report(sc, x, _resolution(args, sc), args.engine)
    _emit(to_json({"input_plan": plan.to_dict(), "sparse_plan": sparse.to_dict(),
                   "report": report.to_dict()}), args.out)
    return EXIT_OK if report.passed else EXIT_NUMERICAL


def cmd_certify(args, sc: Scenario) -> int:
    seed = sc.seed if args.seed is None else args.seed
    k = _resolution(args, sc)
    x = _probe(args, sc)
    reports = [certify.inheritance_suite(sc.firms, trials=sc.trials, seed=seed)]
    if sc.concave:
        w = support_price(sc.firms, x, k)
        reports.append(certify.profit_equivalence(sc.firms, w, x, k=k))
    else:
        reports.append(certify.profit_impossibility(sc.firms, x, k, seed=seed))
    reports.append(sparsity_report(sc, x, k)[2])
    ok = all(r.passed for r in reports)
    _emit(to_json({"scenario": sc.name, "passed": ok, "reports": [r.to_dict() for r in reports]}), args.out)
    return EXIT_OK if ok else EXIT_NUMERICAL


_HANDLERS = {
    "eval": cmd_eval,
    "aggregate": cmd_aggregate,
    "flat": cmd_flat,
    "figure": cmd_figure,
    "certify": cmd_certify,
    "sparsify": cmd_sparsify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supconv", description="Aggregate constant-returns technologies.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario JSON file, or fig1/fig2/fig3")
    p.add_argument("--x", help="input vector, comma separated")
    p.add_argument("--firm", type=int, help="1-based firm index (eval)")
    p.add_argument("--engine", default="auto", choices=aggregator.ENGINES)
    p.add_argument("--resolution", type=int, help="simplex grid resolution K")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--svg", help="also write an SVG plot (figure)")
    p.add_argument("--seed", type=int, help="random seed for sampled checks")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.resolution is not None and args.resolution < 1:
            raise InputError("--resolution must be a positive integer")
        sc = load_scenario(args.scenario)
        return _HANDLERS[args.command](args, sc)
    except InputError as exc:
        code = EXIT_INPUT
        msg = str(exc)
    except CapabilityError as exc:
        code = EXIT_CAPABILITY
        msg = str(exc)
    except PreconditionError as exc:
        code = EXIT_PRECONDITION
        msg = str(exc)
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        code = EXIT_NUMERICAL
        msg = str(exc)
    sys.stderr.write(f"supconv {args.command}: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
