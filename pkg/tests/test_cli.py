import json

import numpy as np
import pytest

from hyperjac import cli, jsonio
from hyperjac.curvegeom import make_curve
from hyperjac.errors import SingularPeriodMatrix

CURVE = {"branch_points": [-3, -2, -1, 0.5, 1, 2.5, 3, 4.2]}


def _run(tmp_path, argv, data=None):
    args = list(argv)
    if data is not None:
        src = tmp_path / "in.json"
        src.write_text(json.dumps(data) if isinstance(data, dict) else data)
        args += ["--input", str(src)]
    out = tmp_path / "out.json"
    code = cli.main(args + ["--output", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def test_encode_complex_and_arrays():
    enc = jsonio.encode({"z": 1 + 2j, "a": np.array([[1j, 2.0]]), "n": np.int64(3), "neg": -0.0})
    assert enc == {"z": [1.0, 2.0], "a": [[[0.0, 1.0], [2.0, 0.0]]], "n": 3, "neg": 0.0}


def test_point_forms():
    curve = make_curve(CURVE["branch_points"])
    p = jsonio.point_from(curve, {"x": [0.5, 1.0], "sheet": -1})
    assert p.w == -curve.w_plus(0.5 + 1j)
    assert jsonio.point_from(curve, {"branch": 3}).x == -1
    with pytest.raises(jsonio.MalformedInput):
        jsonio.point_from(curve, {"x": "one"})


def test_periods(tmp_path):
    code, rep = _run(tmp_path, ["periods"], CURVE)
    assert code == 0 and rep["status"] == "ok"
    assert rep["result"]["checks"]["symmetry"]["status"] == "pass"
    assert "convention" in rep["result"]


def test_theta_with_matrix(tmp_path):
    data = {"period_matrix": [[[0, 1]]], "u": [[0.1]]}
    code, rep = _run(tmp_path, ["theta"], data)
    assert code == 0
    val = complex(*rep["result"]["values"][0]["normalized_value"])
    ls = rep["result"]["values"][0]["log_scale"]
    ref = sum(np.exp(-np.pi * m * m + 2j * np.pi * m * 0.1) for m in range(-10, 11))
    assert abs(val * np.exp(ls) - ref) < 1e-13


def test_eta_with_oracle(tmp_path):
    data = dict(CURVE, R={"x": [1.7, 0.8]}, Q={"x": [-0.2, -0.9], "sheet": -1},
                path={"waypoints": [[0.2, 2], [2, 2], [2, -2], [0.3, -1.9]], "sheet": 1})
    code, rep = _run(tmp_path, ["eta", "--oracle"], data)
    r = rep["result"]
    assert code == 0 and r["discrepancy"]["status"] == "pass"
    assert set(r) >= {"increment", "branch_windings", "oracle_value", "discrepancy"}


def test_malformed_json(tmp_path):
    code, rep = _run(tmp_path, ["periods"], "{bad")
    assert code == 1 and rep["error"] == "MalformedInput"
    assert "line 1" in rep["message"]


def test_input_error(tmp_path):
    code, rep = _run(tmp_path, ["periods"], {"branch_points": [0, 1, 2]})
    assert code == 1 and rep["error"] == "OddCount"
    code, rep = _run(tmp_path, ["locus", "verify"], dict(CURVE, system="g5"))
    assert code == 1


def test_usage_error():
    assert cli.main(["nonsense"]) == 1
    assert cli.main(["periods"]) == 1


def test_numerical_error(tmp_path, monkeypatch):
    def fail(curve, tol=None):
        raise SingularPeriodMatrix("forced")

    monkeypatch.setattr(cli, "compute_periods", fail)
    code, rep = _run(tmp_path, ["periods"], CURVE)
    assert code == 2 and rep["error"] == "SingularPeriodMatrix"


def test_locus_classify(tmp_path):
    data = dict(CURVE, system="g3_pair", u=[[0, 0, 0], [0.1, 0.2, 0.3]],
                points={"P": {"x": [0.3, 1]}, "Q": {"branch": 2}})
    code, rep = _run(tmp_path, ["locus", "classify"], data)
    assert code == 0 and rep["result"]["labels"] == ["OnCurveImage", "NotASolution"]


@pytest.fixture(scope="module")
def demo_runs(tmp_path_factory):
    outs = []
    for k in range(2):
        d = tmp_path_factory.mktemp(f"demo{k}")
        assert cli.main(["demo", "--output", str(d), "--seed", "0"]) == 0
        outs.append(d)
    return outs


def test_demo_passes(demo_runs):
    rep = json.loads((demo_runs[0] / "demo_report.json").read_text())
    assert rep["all_pass"]
    assert all(c["status"] == "pass" for c in rep["checks"].values())
    assert "tol" in next(iter(rep["checks"].values()))
    lines = (demo_runs[0] / "demo_trace.csv").read_text().splitlines()
    assert lines[0].startswith("phase,index,x_re")
    assert any(line.startswith("loop,") for line in lines)


def test_demo_deterministic(demo_runs):
    a, b = demo_runs
    for name in ("demo_report.json", "demo_trace.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
