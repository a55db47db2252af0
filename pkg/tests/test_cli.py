"""End-to-end command line coverage through in-process main() calls."""

import csv
import json

import pytest

from tepflow.cli import main
from tepflow.netmodel import load_network, save_network


@pytest.fixture()
def b2_path(tmp_path, fixture_nets):
    path = tmp_path / "b2.json"
    save_network(fixture_nets["B.2"], str(path))
    return str(path)


def run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, out


def test_generate_fixture_csv_dir(tmp_path, capsys, fixture_nets):
    out = tmp_path / "net"
    rc = main(["generate", "--fixture", "C.2", "--out", str(out)])
    assert rc == 0
    assert (out / "buses.csv").exists() and (out / "lines.csv").exists()
    assert load_network(str(out)) == fixture_nets["C.2"]


def test_generate_random_is_seed_reproducible(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.json", "b.json", "c.json"))
    args = ["generate", "--buses", "6", "--zones", "2", "--out", str(a)]
    assert main(args + ["--seed", "9"]) == 0
    assert main(["--seed", "9", "generate", "--buses", "6", "--zones", "2", "--out", str(b)]) == 0
    assert main(["generate", "--seed", "10", "--buses", "6", "--zones", "2", "--out", str(c)]) == 0
    assert a.read_text() == b.read_text()  # flag position must not matter
    assert a.read_text() != c.read_text()


def test_generate_unknown_fixture_is_input_error(tmp_path):
    assert main(["generate", "--fixture", "nope", "--out", str(tmp_path / "x.json")]) == 1


def test_solve_both_cross_checks(b2_path, tmp_path, capsys):
    out = tmp_path / "sol.json"
    rc = main(["solve", "--formulation", "both", "--mip-gap", "1e-9", "--out", str(out), b2_path])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert {"angle", "cycle"} <= set(doc)
    assert doc["cross_check"]["bound_rule_holds"] is True
    ang = doc["angle"]["solution"]
    cyc = doc["cycle"]["solution"]
    assert ang["objective_upper"] == pytest.approx(cyc["objective_upper"], rel=1e-6)
    assert doc["cycle"]["flow_report"]["residuals"]["kcl"] <= 1e-6


def test_solve_single_formulation_to_stdout(b2_path, capsys):
    rc, out = run(capsys, ["solve", "--formulation", "cycle", b2_path])
    assert rc == 0
    doc = json.loads(out)
    assert "cycle" in doc and "angle" not in doc
    assert doc["cycle"]["solution"]["status"] in ("optimal", "gap_reached")


def test_solve_missing_network_is_input_error(tmp_path):
    assert main(["solve", str(tmp_path / "absent.json")]) == 1


def test_solve_angle_on_ringed_zone_graph_exits_unsupported(tmp_path, fixture_nets):
    path = tmp_path / "d1.json"
    save_network(fixture_nets["D.1"], str(path))
    assert main(["solve", "--formulation", "angle", str(path)]) == 4
    assert main(["solve", "--formulation", "cycle", str(path)]) == 0


def test_solve_time_limit_status(b2_path, tmp_path):
    out = tmp_path / "tl.json"
    rc = main(
        ["solve", "--formulation", "cycle", "--time-limit", "0", "--skip-physics", "--out", str(out), b2_path]
    )
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["cycle"]["solution"]["status"] == "time_limit"


def test_export_lp_and_graph_dump(b2_path, tmp_path):
    lp = tmp_path / "model.lp"
    dumps = tmp_path / "debug"
    rc = main(["export", "--formulation", "angle", "--dump-graphs", str(dumps), "--out", str(lp), b2_path])
    assert rc == 0
    text = lp.read_text()
    assert text.startswith("\\ tepflow export") and text.rstrip().endswith("End")
    assert (dumps / "cycles.txt").exists() and (dumps / "subnetwork.dot").exists()


def test_export_mps_by_suffix(b2_path, tmp_path):
    mps = tmp_path / "model.mps"
    assert main(["export", "--out", str(mps), b2_path]) == 0
    assert mps.read_text().rstrip().endswith("ENDATA")


def test_export_unknown_suffix_is_input_error(b2_path, tmp_path):
    assert main(["export", "--out", str(tmp_path / "model.xyz"), b2_path]) == 1


def test_verify_clean_network(b2_path, tmp_path):
    out = tmp_path / "audit.json"
    rc = main(["verify", "--formulation", "both", "--out", str(out), b2_path])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["formulations"]["angle"]["status"] == "ok"
    assert doc["formulations"]["cycle"]["status"] == "ok"
    assert doc["objectives_agree"] is True


def test_verify_halved_bigm_fails(tmp_path, fixture_nets):
    path = tmp_path / "neg.json"
    save_network(fixture_nets["NEG.1"], str(path))
    out = tmp_path / "audit.json"
    rc = main(["verify", "--bigm-scale", "0.5", "--out", str(out), str(path)])
    assert rc == 3
    doc = json.loads(out.read_text())
    assert any(doc["formulations"][k]["violations"] for k in doc["formulations"])


def test_verify_enumeration_cap(tmp_path, fixture_nets):
    path = tmp_path / "d2.json"
    save_network(fixture_nets["D.2"], str(path))
    assert main(["verify", "--max-binaries", "1", str(path)]) == 5


def test_verify_skips_angle_on_ringed_zone_graph(tmp_path, fixture_nets):
    path = tmp_path / "d1.json"
    save_network(fixture_nets["D.1"], str(path))
    out = tmp_path / "audit.json"
    assert main(["verify", "--formulation", "both", "--out", str(out), str(path)]) == 0
    doc = json.loads(out.read_text())
    assert doc["formulations"]["angle"]["status"] == "unsupported"
    assert doc["formulations"]["cycle"]["status"] == "ok"


def test_benchmark_matrix(tmp_path, fixture_nets):
    matrix = tmp_path / "matrix.json"
    matrix.write_text(json.dumps([
        {"fixture": "B.2"},
        {"label": "gen4", "seed": 21, "n_buses": 4, "n_zones": 2},
    ]))
    out = tmp_path / "bench.csv"
    rc = main(["benchmark", "--repeats", "1", "--out", str(out), str(matrix)])
    assert rc == 0
    rows = list(csv.reader(out.read_text().splitlines()))
    header, body = rows[0], rows[1:]
    assert header[0] == "label" and "speedup" in header
    labels = [r[0] for r in body]
    assert "B.2" in labels and "gen4" in labels
    assert any(l.startswith("summary_mean") for l in labels)
    assert any(l.startswith("control_") for l in labels)
    by_label = {r[0]: dict(zip(header, r)) for r in body}
    ratio = float(by_label["B.2"]["variable_ratio"])
    cols_angle = float(by_label["B.2"]["columns_angle"])
    cols_cycle = float(by_label["B.2"]["columns_cycle"])
    assert ratio == cols_cycle / cols_angle


def test_benchmark_bad_matrix_is_input_error(tmp_path):
    matrix = tmp_path / "matrix.json"
    matrix.write_text(json.dumps([{"unknown_knob": 1}]))
    assert main(["benchmark", str(matrix)]) == 1


def test_bigm_report_csv(tmp_path, fixture_nets, capsys):
    path = tmp_path / "d1.json"
    save_network(fixture_nets["D.1"], str(path))
    rc, out = run(capsys, ["bigm-report", str(path)])
    assert rc == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert {r["rule"] for r in rows} >= {"inter_sum", "cycle_sum"}
    kvl = next(r for r in rows if r["key"] == "kvl:c1")
    assert float(kvl["value"]) == pytest.approx(1105.0)
    assert "+" in next(r for r in rows if r["rule"] == "cycle_sum")["members"]
