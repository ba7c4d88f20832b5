import json

import numpy as np
import pytest

from phivar.cli import run
from phivar.report import Report, polyline_svg, rows_to_csv


@pytest.fixture()
def configs(tmp_path):
    paths = {}
    for name, cfg in {
        "s5": {"kind": "sphere", "dim": 5},
        "warped": {"kind": "warped_circle", "amplitude": 0.3, "grid": [120]},
        "equator": {"kind": "equator", "target": {"kind": "sphere", "dim": 5},
                    "grid": [64]},
        "spec5": {"dim": 5, "c": 4.0, "isometry_dim": 15,
                  "eigenpairs": [[5.0, 6], [12.0, 20], [21.0, 50]]},
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(cfg))
        paths[name] = str(p)
    return tmp_path, paths


def test_no_arguments_is_a_usage_error():
    assert run([]) == 2


def test_report_serialization_is_stable():
    rep = Report("demo", inputs={"b": 1, "a": 2}, results={"x": np.float64(3)})
    text = rep.to_json()
    assert text == rep.to_json()
    parsed = json.loads(text)
    assert set(parsed) == {"schema_version", "tool_version", "command",
                           "inputs", "results", "timings"}
    assert parsed["results"]["x"] == 3.0


def test_csv_and_svg_helpers(tmp_path):
    rows = [{"a": 1, "b": 2.5}, {"a": 3, "b": -1.0}]
    text = rows_to_csv(rows, path=str(tmp_path / "t.csv"))
    assert text.splitlines()[0] == "a,b"
    assert (tmp_path / "t.csv").read_text() == text
    svg = polyline_svg([0.0, 1.0, 0.5], path=str(tmp_path / "t.svg"),
                       title="demo")
    assert svg.startswith("<svg") and "polyline" in svg


def test_ssu_check_report_and_determinism(configs):
    tmp_path, paths = configs
    out1, out2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
    assert run(["ssu", "check", "--chart", paths["s5"], "--grid", "2",
                "--out", out1]) == 0
    assert run(["ssu", "check", "--chart", paths["s5"], "--grid", "2",
                "--out", out2]) == 0
    r1, r2 = (json.load(open(p)) for p in (out1, out2))
    for r in (r1, r2):
        r.pop("timings")
        r["inputs"].pop("out")
    assert r1 == r2
    assert r1["results"]["phi"]["is_ssu"] is True
    assert r1["results"]["phi"]["worst_value"] == pytest.approx(-1.0,
                                                                abs=1e-8)


def test_ssu_sweep_csv(configs):
    tmp_path, paths = configs
    csv_path = str(tmp_path / "sweep.csv")
    assert run(["ssu", "sweep", "--kind", "sphere", "--dims", "2..6",
                "--csv", csv_path, "--out", str(tmp_path / "sweep.json")]) == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "dim,verdict,worst_value"
    verdicts = [ln.split(",")[1] for ln in lines[1:]]
    assert verdicts == ["False", "False", "False", "True", "True"]


def test_energy_eval_values(configs):
    tmp_path, paths = configs
    out = str(tmp_path / "energy.json")
    assert run(["energy", "eval", "--map", paths["warped"],
                "--out", out]) == 0
    res = json.load(open(out))["results"]
    assert set(res) >= {"E", "E_phi", "E_p", "tension_sup"}
    assert res["E_phi"] > 0.5 * np.pi  # above the unwarped equator energy


def test_variation_check_writes_case_table(configs):
    tmp_path, paths = configs
    csv_path = str(tmp_path / "var.csv")
    assert run(["variation", "check", "--suite", "default",
                "--csv", csv_path, "--out", str(tmp_path / "var.json")]) == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "case,order,analytic,fd,abs_err,rel_err"
    assert len(lines) > 10


def test_flow_decay_artifacts(configs):
    tmp_path, paths = configs
    csv_path, svg_path = str(tmp_path / "tr.csv"), str(tmp_path / "tr.svg")
    assert run(["flow", "decay", "--map", paths["equator"], "--iters", "50",
                "--csv", csv_path, "--svg", svg_path,
                "--out", str(tmp_path / "tr.json")]) == 0
    res = json.load(open(tmp_path / "tr.json"))["results"]
    assert res["final_energy"] < 1e-4 * res["initial_energy"]
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "iter,energy,ratio,ell,sign,zeta"
    assert open(svg_path).read().startswith("<svg")


def test_index_from_spectrum_file(configs, capsys):
    tmp_path, paths = configs
    assert run(["index", "--spectrum", paths["spec5"], "--phi",
                "--out", str(tmp_path / "idx.json")]) == 0
    assert "(index, nullity) = (6, 15)" in capsys.readouterr().out
    res = json.load(open(tmp_path / "idx.json"))["results"]
    assert (res["index"], res["nullity"]) == (6, 15)
    assert run(["index", "--spectrum", paths["spec5"], "--p", "2",
                "--out", str(tmp_path / "idx2.json")]) == 0
    res2 = json.load(open(tmp_path / "idx2.json"))["results"]
    assert (res2["index"], res2["nullity"]) == (6, 15)


def test_index_table_csv(configs):
    tmp_path, paths = configs
    csv_path = str(tmp_path / "table.csv")
    assert run(["index", "table", "--dims", "2..3", "--out", csv_path]) == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0].startswith("n,phi_ssu,spectral_criterion")
    assert len(lines) == 3


def test_input_errors_exit_two(configs, tmp_path):
    _, paths = configs
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["ssu", "check", "--chart", str(bad)]) == 2
    assert run(["ssu", "check", "--chart", "no-such-file.json"]) == 2
    assert run(["energy", "eval"]) == 2
    assert run(["acceptance", "--only", "not-a-criterion"]) == 2
    assert run(["acceptance", "--tol.nonexistent", "1"]) == 2


def test_acceptance_single_criterion(configs, capsys):
    assert run(["acceptance", "--only", "S5-index"]) == 0
    assert "PASS  S5-index" in capsys.readouterr().out


def test_acceptance_tolerance_override_can_fail(configs):
    assert run(["acceptance", "--only", "first-variation",
                "--tol.fd_match=1e-30"]) == 1
