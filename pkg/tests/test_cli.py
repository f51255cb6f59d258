import csv
import json
import math

import numpy as np
import pytest

from polystab.cli import main, run_sweep
from polystab.config import SweepSpec
from polystab.report import RunManifest, csv_body, csv_text, emit_profile_svg

from conftest import MAIN, REST_CHANGES


@pytest.fixture
def configs(tmp_path):
    paths = {}
    for name, doc in {"main": MAIN, "rest": {**MAIN, **REST_CHANGES},
                      "bad": {**MAIN, "beta": 1.5}}.items():
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(doc))
    paths["broken"] = tmp_path / "broken.json"
    paths["broken"].write_text("{not json")
    return paths


def read_table(path):
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def test_baseflow_main_case(configs, tmp_path):
    out = tmp_path / "o"
    assert main(["baseflow", "--config", str(configs["main"]), "--grid", "129",
                 "--out", str(out)]) == 0
    rows = read_table(out / "baseflow.csv")
    assert list(rows[0]) == ["y", "u", "a11", "a12", "a22", "Z", "L", "P"]
    u = np.array([float(r["u"]) for r in rows])
    assert np.max(np.abs(u - u[::-1])) > 1e-3
    text = (out / "baseflow.csv").read_text()
    manifest = json.loads((out / "baseflow_manifest.json").read_text())
    assert f"# manifest {manifest['input_hash']}" in text
    assert "\r" not in text
    svg = (out / "baseflow_u.svg").read_text()
    assert f"<!-- manifest {manifest['input_hash']} -->" in svg


def test_baseflow_rest_state(configs, tmp_path):
    assert main(["baseflow", "--config", str(configs["rest"]), "--grid", "129",
                 "--out", str(tmp_path)]) == 0
    u = [abs(float(r["u"])) for r in read_table(tmp_path / "baseflow.csv")]
    assert max(u) < 1e-10


def test_config_errors_exit_1(configs, tmp_path, capsys):
    assert main(["baseflow", "--config", str(configs["bad"]), "--out", str(tmp_path)]) == 1
    assert "ValidationError" in capsys.readouterr().err
    assert main(["baseflow", "--config", str(configs["broken"]), "--out", str(tmp_path)]) == 1
    assert main(["baseflow", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["baseflow", "--config", str(configs["main"]), "--grid", "100"]) == 1


def test_solver_failure_exit_2(tmp_path, capsys):
    path = tmp_path / "cold.json"
    path.write_text(json.dumps({**MAIN, "theta_bar": -0.95}))
    assert main(["baseflow", "--config", str(path), "--grid", "129",
                 "--out", str(tmp_path)]) == 2
    assert "BranchLoss" in capsys.readouterr().err


def test_spectrum_without_oracle(configs, tmp_path):
    assert main(["spectrum", "--config", str(configs["main"]), "--grid", "129",
                 "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "spectrum.csv")
    assert len(rows) == 21
    assert len({r["re_lambda"] for r in rows}) == 1
    summary = json.loads((tmp_path / "spectrum.json").read_text())
    assert summary["spacing"] == pytest.approx(math.pi / summary["A_phase"])


def test_spectrum_omega_zero_skips_oracle(configs, tmp_path, capsys):
    assert main(["spectrum", "--config", str(configs["rest"]), "--grid", "129", "--omega", "0",
                 "--with-oracle", "--out", str(tmp_path)]) == 0
    assert "oracle skipped" in capsys.readouterr().err
    assert (tmp_path / "spectrum.csv").exists()
    assert not (tmp_path / "oracle.csv").exists()


def test_spectrum_with_oracle(configs, tmp_path):
    assert main(["spectrum", "--config", str(configs["main"]), "--grid", "257", "--k-lo", "5",
                 "--k-hi", "8", "--with-oracle", "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "oracle.csv")
    assert list(rows[0]) == ["k_seed", "re_lambda_seed", "im_lambda_seed", "re_lambda_found",
                             "im_lambda_found", "residual", "divergence_diag", "n"]
    assert len(rows) == 4
    summary = json.loads((tmp_path / "spectrum.json").read_text())
    assert summary["oracle"]["matched"] >= 1


def test_margin_command(configs, tmp_path):
    assert main(["margin", "--config", str(configs["rest"]), "--grid", "129",
                 "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "margin.json").read_text())
    assert data["margin_form_B"] == pytest.approx(0.5, abs=1e-12)
    assert data["classification"] == "violated"


def test_k_range_order(configs):
    assert main(["spectrum", "--config", str(configs["main"]), "--k-lo", "5", "--k-hi", "4"]) == 1


def _sweep_file(tmp_path, doc):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    return path


def test_sweep_single_value(tmp_path):
    path = _sweep_file(tmp_path, {"axis": "theta_bar", "values": [0.5], "fixed": MAIN,
                                  "grid": 129})
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert len(read_table(tmp_path / "sweep.csv")) == 1
    assert read_table(tmp_path / "sweep_boundaries.csv") == []


def test_sweep_records_failures(tmp_path):
    path = _sweep_file(tmp_path, {"axis": "theta_bar", "values": [1.0, -0.95, 0.5],
                                  "fixed": MAIN, "grid": 129})
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "sweep.csv")
    assert [float(r["theta_bar"]) for r in rows] == [-0.95, 0.5, 1.0]
    assert rows[0]["error"] == "BranchLoss" and rows[0]["margin_form_B"] == "nan"
    assert rows[1]["error"] == "" and float(rows[1]["margin_form_B"]) > 0


def test_sweep_spec_error_exit_1(tmp_path):
    path = _sweep_file(tmp_path, {"axis": "bogus", "values": [1.0], "fixed": MAIN})
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 1


def test_sweep_without_sign_change_has_no_boundary():
    spec = SweepSpec.from_dict({"axis": "beta", "values": [0.3, 0.6], "fixed": MAIN,
                                "grid": 129})
    values, results, boundaries = run_sweep(spec)
    assert values == [0.3, 0.6]
    assert all(r["margin_form_B"] > 0 for r in results)
    assert boundaries == []


def test_bisection_on_synthetic_margin(monkeypatch):
    from polystab import cli

    def fake_point(params, grid_n, tol):
        m = params.Re - 1.2345678
        return {"margin_form_A": m, "margin_form_B": m, "classification": "", "discrepancy": 0.0,
                "A_phase": 1.0, "B_re": 0.0, "B_im": 0.0, "re_lambda": 0.0, "error": ""}

    monkeypatch.setattr(cli, "sweep_point", fake_point)
    spec = SweepSpec.from_dict({"axis": "Re", "values": [1.0, 2.0, 3.0], "fixed": MAIN})
    _, _, boundaries = run_sweep(spec)
    assert len(boundaries) == 1
    b = boundaries[0]
    assert b["hi"] - b["lo"] < 1e-6
    assert abs(b["boundary"] - 1.2345678) < 1e-6


def test_sweep_parallel_identical(tmp_path):
    path = _sweep_file(tmp_path, {"axis": "A_hat", "range": [0.0, 2.0, 4], "fixed": MAIN,
                                  "grid": 129})
    bodies = []
    for jobs in ("1", "3"):
        out = tmp_path / f"j{jobs}"
        assert main(["sweep", "--config", str(path), "--out", str(out), "--jobs", jobs]) == 0
        bodies.append((out / "sweep.csv").read_text())
    assert bodies[0] == bodies[1]


def test_csv_formatting():
    text = csv_text(["a", "b"], [[1.0, math.nan], [0.1, 3]], comments=["hello"])
    assert text == "# hello\na,b\n1.0,nan\n0.1,3\n"
    assert csv_body(text) == "a,b\n1.0,nan\n0.1,3\n"


def test_manifest_hash_ignores_timing():
    a = RunManifest(command="x", params_hash="p", grids=[129], tolerances={"tol": 1e-9})
    b = RunManifest(command="x", params_hash="p", grids=[129], tolerances={"tol": 1e-9},
                    wall_clock=12.0, outputs=["f"])
    assert a.input_hash == b.input_hash
    c = RunManifest(command="x", params_hash="p", grids=[257], tolerances={"tol": 1e-9})
    assert a.input_hash != c.input_hash


def test_svg_constant_profile_and_determinism(tmp_path):
    y = np.linspace(-0.5, 0.5, 11)
    p1 = emit_profile_svg(y, {"c": np.full(11, 2.0)}, tmp_path / "a.svg", "abc")
    p2 = emit_profile_svg(y, {"c": np.full(11, 2.0)}, tmp_path / "b.svg", "abc")
    assert p1.read_text() == p2.read_text()
    assert "<svg" in p1.read_text()


@pytest.mark.parametrize("x,series", [([], {"a": []}), ([0.0, 1.0], {})])
def test_svg_rejects_empty(tmp_path, x, series):
    with pytest.raises(ValueError):
        emit_profile_svg(x, series, tmp_path / "e.svg", "abc")


def test_coefficient_dump(configs, tmp_path):
    assert main(["spectrum", "--config", str(configs["rest"]), "--grid", "129",
                 "--dump-coefficients", "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "coefficients.csv")
    assert len(rows) == 129
    assert rows[0]["y"] == "-0.5" and "R44" in rows[0]
    assert all(float(r["R44"]) == pytest.approx(1.0) for r in rows)
