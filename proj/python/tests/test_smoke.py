import json
import math

import pytest

import conefield as cf


def test_expression_precedence():
    assert cf.evaluate("2+3*4^2", []) == 50.0
    assert cf.evaluate("x1 + 2*x2", [1.0, 3.0]) == 7.0


def test_classify_inertia():
    c = cf.classify([[1.0, 0.0], [0.0, -2.0]])
    assert c["membership"] == "outside"
    assert (c["positive"], c["negative"], c["zero"]) == (1, 1, 0)


def test_gaussian_volume():
    grid = cf.Grid(cf.GridConfig(1, 8.0, 2, 16))
    v = cf.volume(cf.builtin("gaussian_conformal", 1, [1.0]), grid)
    assert v["converged"]
    assert abs(v["value"] - math.sqrt(2 * math.pi)) < 1e-6


def test_ebin_trace_matches_frame():
    grid = cf.Grid(cf.GridConfig(2, 2.0, 2, 8))
    g = cf.builtin("gaussian_conformal", 2, [1.0])
    h = cf.expr_field(2, ["exp(-x1^2-x2^2)", "0.3*exp(-x1^2-x2^2)", "exp(-x1^2-x2^2)*cos(x1)"])
    a = cf.ebin(g, h, h, grid)["value"]
    b = cf.ebin(g, h, h, grid, frame=True)["value"]
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_jet_norm_example():
    grid = cf.Grid(cf.GridConfig(1, 1.0, 4, 1024))
    sigma = cf.expr_field(1, ["exp(x1)*sin(x1)"])
    r = cf.norm(sigma, cf.builtin("exp_gauge", 1, [1.0]), 1, grid)
    assert r["converged"]
    assert abs(r["value"] - math.sqrt(2)) < 1e-6


def test_errors_carry_code():
    with pytest.raises(cf.ConefieldError, match="syntax-error"):
        cf.evaluate("exp(", [])


def test_cli_in_process(tmp_path):
    spec = tmp_path / "g.field"
    spec.write_text("dim = 1\nkind = builtin\nname = gaussian_conformal\nparams = 1\n")
    code, out, err = cf.run_cli(["ebin", "--g", str(spec), "--h", str(spec), "--k", str(spec)])
    assert code == 0, err
    report = json.loads(out)
    assert abs(report["result"]["value"] - math.sqrt(2 * math.pi)) < 1e-6


def test_suite_runs():
    r = cf.run_suite("frame_trace", 0, 5)
    assert r["failures"] == 0
