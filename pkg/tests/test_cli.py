import json
import subprocess
import sys

import numpy as np
import pytest

from supconv.cli import fmt, main
from supconv.errors import InputError
from supconv.scenario import load_scenario, scenario_from_dict

from conftest import FLAT_LEVEL


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fmt():
    assert fmt(0.4) == "0.400000000"
    assert fmt(0.0) == "0.000000000"
    assert fmt(FLAT_LEVEL) == "0.529133684"
    assert fmt(12.5) == "12.5000000"


def test_bundled_scenarios_load():
    for name in ("fig1", "fig2", "fig3"):
        sc = load_scenario(name)
        assert sc.dim == 2
    assert not load_scenario("fig1").concave
    assert len(load_scenario("fig3").firms) == 3


@pytest.mark.parametrize("record, message", [
    ({}, "firms"),
    ({"firms": []}, "firms"),
    ({"firms": [{"family": "leontief", "a": [1, 1]}], "colour": 1}, "unknown scenario field"),
    ({"firms": [{"family": "leontief", "a": [1, 1]}, {"family": "linear", "v": [1, 1, 1]}]}, "dimension"),
    ({"firms": [{"family": "leontief", "a": [1, -1]}]}, "firm 1"),
    ({"firms": [{"family": "leontief", "a": [1, 1]}], "resolution": 0}, "resolution"),
    ({"firms": [{"family": "leontief", "a": [1, 1]}], "probe": [1]}, "probe"),
    ({"firms": [{"family": "leontief", "a": [1, 1]}], "tolerance": 2}, "tolerance"),
])
def test_scenario_validation(record, message):
    with pytest.raises(InputError, match=message):
        scenario_from_dict(record)


def test_eval(capsys):
    assert run(capsys, "eval", "--scenario", "fig3", "--firm", "1", "--x", "0.2,0.8")[:2] == (0, "0.400000000\n")
    assert run(capsys, "eval", "--scenario", "fig3", "--firm", "1", "--x", "0,0")[:2] == (0, "0.000000000\n")
    code, out, err = run(capsys, "eval", "--scenario", "fig3", "--firm", "9", "--x", "0,0")
    assert code == 2 and "no such firm" in err and out == ""


@pytest.mark.parametrize("x", ["0.2", "a,b", "1,-1", "1,nan"])
def test_bad_vectors(capsys, x):
    assert run(capsys, "eval", "--scenario", "fig3", "--firm", "1", "--x", x)[0] == 2


def test_aggregate(capsys):
    code, out, _ = run(capsys, "aggregate", "--scenario", "fig2", "--x", "0.5,0.5")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(FLAT_LEVEL, abs=1e-6) and rec["n_active"] == 2
    code, out, _ = run(capsys, "aggregate", "--scenario", "fig3", "--x", "0.5,0.5")
    rec = json.loads(out)
    assert rec["value"] == pytest.approx(0.5) and rec["active_firms"] == [2]
    assert list(rec) == ["engine", "value", "total", "weights", "firm_points", "active_firms", "n_active"]


def test_aggregate_sandwich_and_mismatch(capsys):
    code, out, _ = run(capsys, "aggregate", "--scenario", "fig2", "--x", "1,1", "--engine", "sandwich")
    rec = json.loads(out)
    assert code == 0 and rec["bounds"]["lower"] <= 2 * FLAT_LEVEL <= rec["bounds"]["upper"] + 1e-8
    code, _, err = run(capsys, "aggregate", "--scenario", "fig1", "--x", "1,1", "--engine", "exact2d")
    assert code == 3 and "not concave" in err


def test_aggregate_one_firm(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"firms": [{"family": "cobb_douglas", "alpha": [0.25, 0.75]}]}))
    code, out, _ = run(capsys, "aggregate", "--scenario", str(path), "--x", "2,1")
    assert json.loads(out)["value"] == pytest.approx(float(fmt(2 ** 0.25)))


def test_flat(capsys):
    code, out, _ = run(capsys, "flat", "--scenario", "fig2", "--x", "0.5,0.5")
    rec = json.loads(out)
    assert code == 0 and rec["valid"]
    np.testing.assert_allclose(rec["price"], [0.5291, 0.5291], atol=1e-4)
    code, out, _ = run(capsys, "flat", "--scenario", "fig3", "--x", "0.35,0.65")
    np.testing.assert_allclose(json.loads(out)["price"], [0.667, 0.333], atol=1e-3)
    code, out, err = run(capsys, "flat", "--scenario", "fig2", "--x", "0,1")
    assert code == 4 and "boundary point: supergradient not guaranteed" in err


def _csv(capsys, *argv):
    code, out, _ = run(capsys, "figure", *argv)
    assert code == 0
    lines = out.splitlines()
    return lines[0].split(","), np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


def test_figure_fig3(capsys):
    header, rows = _csv(capsys, "--scenario", "fig3", "--resolution", "1000")
    assert header == ["t", "F_1", "F_2", "F_3", "F"]
    assert rows.shape == (1001, 5)
    i = int(np.argmax(rows[:, -1]))
    assert rows[i, 0] == 0.5 and rows[i, -1] == 0.5


def test_figure_fig2_flat(capsys):
    _, rows = _csv(capsys, "--scenario", "fig2")
    mask = (rows[:, 0] >= 0.334) & (rows[:, 0] <= 0.666)
    assert np.all(np.abs(rows[mask, -1] - FLAT_LEVEL) <= 1e-3)


def test_figure_fig1(capsys):
    _, rows = _csv(capsys, "--scenario", "fig1")
    (i,) = np.nonzero(np.isclose(rows[:, 0], 0.7))[0]
    assert rows[i, -1] == pytest.approx(0.5, abs=2e-3)


def test_figure_files_and_svg(tmp_path, capsys):
    a, b, svg = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "f.svg"
    assert run(capsys, "figure", "--scenario", "fig2", "--out", str(a), "--svg", str(svg))[0] == 0
    assert run(capsys, "figure", "--scenario", "fig2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    text = svg.read_text()
    assert text.startswith("<svg") and text.count("<polyline") == 3


def test_figure_needs_two_inputs(tmp_path, capsys):
    path = tmp_path / "three.json"
    path.write_text(json.dumps({"firms": [{"family": "leontief", "a": [1, 2, 3]}]}))
    code, _, err = run(capsys, "figure", "--scenario", str(path))
    assert code == 3 and "figure emission is 2-input only" in err


def test_certify_fig3(capsys):
    code, out, _ = run(capsys, "certify", "--scenario", "fig3")
    rec = json.loads(out)
    assert code == 0 and rec["passed"]
    assert [r["check"] for r in rec["reports"]] == ["inheritance", "profit_equivalence", "sparsity"]


def test_certify_fig1(capsys):
    code, out, _ = run(capsys, "certify", "--scenario", "fig1")
    rec = json.loads(out)
    assert code == 0
    inh, imp, _ = rec["reports"]
    assert "concavity" in inh["details"]["skipped"]
    assert imp["check"] == "profit_impossibility" and imp["details"]["expected"] == "negative"
    assert imp["details"]["x"] == [0.7, 0.3]


def test_certify_malformed(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"firms": [')
    code, _, err = run(capsys, "certify", "--scenario", str(path))
    assert code == 2 and "line" in err and "column" in err
    code, _, err = run(capsys, "certify", "--scenario", str(tmp_path / "missing.json"))
    assert code == 2


def test_sparsify_command(capsys):
    code, out, _ = run(capsys, "sparsify", "--scenario", "fig2", "--x", "0.5,0.5", "--engine", "sandwich")
    rec = json.loads(out)
    assert code == 0 and rec["sparse_plan"]["n_active"] <= 2 and rec["report"]["passed"]


def test_console_script_byte_identical(tmp_path):
    outs = []
    for _ in range(2):
        proc = subprocess.run([sys.executable, "-m", "supconv.cli", "figure", "--scenario", "fig2"],
                              capture_output=True, check=True)
        outs.append(proc.stdout)
    assert outs[0] == outs[1] and outs[0].startswith(b"t,F_1,F_2,F\n")
