import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from levyedge import std_normal_cdf
from levyedge.cli import main

from conftest import MODELS

BOUNDED = str(MODELS / "bounded_uniform_gaussian.json")
GAMMA = str(MODELS / "gamma_tail.json")


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_check_atoms_model(capsys):
    code, out, _ = run(capsys, "check", "--model", MODELS / "atoms_unit_interval.json")
    assert code == 0
    rows = {r["condition"]: r for r in table(out)}
    assert rows["strongest_theorem"]["status"] == "main"
    assert rows["bounded_support"]["status"] == "holds"


def test_cdf_order_zero_is_normal(capsys):
    code, out, _ = run(capsys, "cdf", "--model", BOUNDED, "--t", 5, "--order", 0)
    assert code == 0
    rows = table(out)
    assert len(rows) == 13
    for r in rows:
        assert float(r["value"]) == std_normal_cdf(float(r["y"]))


def test_csv_is_deterministic(capsys, tmp_path):
    args = ["cdf", "--model", BOUNDED, "--t", 5, "--order", 3, "--x-grid", -2, 2, 5]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert "\r" not in first
    path = tmp_path / "out.csv"
    run(capsys, *args, "--output", path)
    assert path.read_bytes() == first.encode()
    header = table(first)[0].keys()
    assert list(header) == ["x", "y", "value", "normal", "term_1", "term_2", "term_3"]
    value = table(first)[1]["value"]
    assert len(value.replace("-", "").replace(".", "").lstrip("0")) >= 15
    assert first.startswith("# levyedge 0.1.0\n# config: ")


def test_json_layout(capsys):
    code, out, _ = run(capsys, "cdf-exact", "--model", BOUNDED, "--t", 5, "--x", "0,1",
                       "--format", "json", "--with-oracle")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"config", "results", "diagnostics"}
    assert doc["config"]["version"] == "0.1.0"
    assert doc["config"]["model"]["sigma2"] == 1.0
    for r in doc["results"]:
        assert r["verdict"] == "converged"
        assert abs(r["value"] - r["oracle"]) < 1e-9


def test_raw_thresholds_are_mapped(capsys):
    code, out, _ = run(capsys, "cdf", "--model", MODELS / "gaussian.json", "--t", 4,
                       "--x", "2", "--raw", "--order", 0)
    assert code == 0
    row = table(out)[0]
    assert float(row["x"]) == 2.0 and float(row["y"]) == 1.0


def test_gate_refusal_exit_code(capsys):
    code, out, err = run(capsys, "cdf-exact", "--model", GAMMA, "--x", "0")
    assert code == 3 and out == ""
    error = json.loads(err.strip().splitlines()[-1])["error"]
    assert error["type"] == "ConditionGateError" and error["exit_code"] == 3


def test_override_watermark_and_divergence(capsys):
    code, out, err = run(capsys, "cdf-exact", "--model", GAMMA, "--x", "0",
                         "--override-conditions")
    assert code == 4
    assert "# UNVERIFIED CONDITIONS" in out
    assert table(out)[0]["verdict"] == "diverging"
    assert "UNVERIFIED CONDITIONS" in err


def test_continuity_warning_for_atom_models(capsys, tmp_path):
    path = tmp_path / "lattice.json"
    path.write_text(json.dumps({"sigma2": 0.0, "rho": 0.0, "atoms": [{"x": 1.0, "mass": 3.0}],
                                "density_pieces": [], "cramer_declared": False}))
    code, out, err = run(capsys, "cdf-exact", "--model", path, "--t", 4, "--x", "0",
                         "--override-conditions", "--max-order", 20)
    assert code in (0, 4)
    assert "continuity points" in err
    assert "UNVERIFIED" in out


@pytest.mark.parametrize("args", [
    ["cdf", "--model", "missing.json"],
    ["cdf", "--model", BOUNDED, "--order", "-1"],
    ["bogus-command"],
    ["cdf", "--model", BOUNDED, "--t", "-2"],
    ["one-sided", "--model", BOUNDED],
    ["iid-sum", "--model", BOUNDED, "--n", "5", "--k", "2"],
])
def test_config_errors_exit_2(capsys, args):
    code, _, err = run(capsys, *args)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"]["exit_code"] == 2


def test_abs_and_pdf_and_cumulants(capsys):
    code, out, _ = run(capsys, "abs", "--model", BOUNDED, "--t", 5, "--x", "0.5,1,2")
    assert code == 0
    for r in table(out):
        assert abs(float(r["abs_cdf"]) + float(r["abs_tail"]) - 1) <= 1e-12
    code, out, _ = run(capsys, "pdf", "--model", BOUNDED, "--t", 5, "--x", "0")
    assert code == 0 and table(out)[0]["verdict"] == "converged"
    code, out, _ = run(capsys, "cumulants", "--model", BOUNDED, "--max-order", 4)
    rows = table(out)
    assert [int(r["order"]) for r in rows] == [2, 3, 4]
    assert float(rows[1]["gamma"]) == pytest.approx(1.25, rel=1e-10)
    assert float(rows[0]["lambda"]) == 1.0


def test_one_sided_and_oracle(capsys):
    model = MODELS / "one_sided_uniform.json"
    code, out, _ = run(capsys, "one-sided", "--model", model, "--t", 5, "--x", "-1,12")
    assert code == 0
    rows = table(out)
    assert abs(float(rows[1]["value"]) - 1) < 1e-10
    code, out, _ = run(capsys, "oracle", "--model", model, "--t", 5, "--x", "-1",
                       "--method", "mc", "--n-paths", 100000, "--seed", 1)
    mc = table(out)[0]
    assert abs(float(mc["value"]) - float(rows[0]["value"])) <= 3 * float(mc["std_error"])


def test_iid_sum_command(capsys):
    from levyedge import gamma_cdf
    code, out, _ = run(capsys, "iid-sum", "--model", MODELS / "exponential_summand.json",
                       "--n", 50, "--k", 4, "--x-grid", -2, 3, 11)
    assert code == 0
    for r in table(out):
        exact = gamma_cdf(50, 50 + np.sqrt(50) * float(r["y"]))
        assert abs(float(r["value"]) - exact) <= 5e-3


def test_convergence_study_slopes(capsys):
    code, out, _ = run(capsys, "convergence-study", "--model", BOUNDED, "--orders", "1,2,3",
                       "--times", "4,16,64,256", "--format", "json")
    assert code == 0
    slopes = json.loads(out)["diagnostics"]["slopes"]
    for order in ("1", "2", "3"):
        assert abs(slopes[order]["slope"] + (int(order) + 1) / 2) <= 0.3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "levyedge", "--version"], capture_output=True,
                         text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
