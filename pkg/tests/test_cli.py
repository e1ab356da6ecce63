import csv
import io
import json
import math
from importlib import resources

import jsonschema
import pytest

from cpring import analysis as an
from cpring import cli, kernel
from cpring.quadrature import QuadratureError

SCHEMA = json.loads(resources.files("cpring").joinpath("report.schema.json").read_text())


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    assert code == 0, text
    obj = json.loads(text)
    jsonschema.validate(obj, SCHEMA)
    return obj


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_energy_ring_at_centre():
    code, text = run("energy", "--body", "ring", "--pol", "axial", "--theta", "0", "--h", "0")
    assert code == 0
    assert float(rows(text)[0]["energy_reduced"]) == -52.0


def test_energy_plate_at_edge():
    code, text = run("energy", "--body", "plate", "--pol", "axial", "--theta", "0", "--h", "0")
    assert code == 0
    assert float(rows(text)[0]["energy_reduced"]) == pytest.approx(-10.4, rel=1e-15)


def test_force_at_window_edge_six_digit_input():
    # stated example: 0.471405 is sqrt(2/9) rounded to six digits
    code, text = run("force", "--body", "ring", "--pol", "axial", "--theta", "90", "--h", "0.471405")
    assert code == 0
    assert abs(float(rows(text)[0]["force_reduced"])) <= 1e-9


def test_force_at_window_edge_full_precision():
    code, text = run("force", "--theta", "90", "--h", repr(math.sqrt(2 / 9)))
    assert code == 0
    assert abs(float(rows(text)[0]["force_reduced"])) <= 1e-9


def test_csv_header_and_provenance():
    code, text = run("energy", "--body", "annulus", "--b", "2.5", "--theta", "0", "45",
                     "--h-range", "0.1", "1.0", "4")
    assert code == 0
    assert text.splitlines()[0] == ",".join(cli.CSV_HEADER)
    recs = rows(text)
    assert len(recs) == 8
    assert [float(r["theta_deg"]) for r in recs] == [0.0] * 4 + [45.0] * 4
    assert [float(r["h_hat"]) for r in recs[:4]] == pytest.approx([0.1, 0.4, 0.7, 1.0])
    assert all(float(r["b_hat"]) == 2.5 for r in recs)
    for r in recs:
        e = float(r["e_iso"]) + float(r["e_aniso"]) * math.cos(2 * math.radians(float(r["theta_deg"])))
        assert float(r["energy_reduced"]) == pytest.approx(e, rel=1e-13)


def test_csv_uses_17_significant_digits():
    _, text = run("energy", "--h", "0.3", "--theta", "10")
    value = rows(text)[0]["energy_reduced"]
    assert len(value.lstrip("-").replace(".", "").lstrip("0").split("e")[0]) >= 16


def test_quadrature_rows_are_flagged():
    code, text = run("energy", "--body", "ring", "--pol", "radial", "--h", "0.5")
    assert code == 0
    assert rows(text)[0]["flags"] == an.QUADRATURE


def test_output_is_byte_identical_across_runs():
    argv = ("energy", "--body", "ring", "--pol", "azimuthal", "--theta", "0", "30", "--h-range", "0.1", "2", "5")
    assert run(*argv)[1] == run(*argv)[1]
    argv = ("delta-e", "--body", "plate", "--h-range", "0.1", "4", "7")
    assert run(*argv)[1] == run(*argv)[1]


def test_energy_json_validates_and_reports_error_estimates():
    obj = run_json("force", "--body", "plate", "--pol", "radial", "--h", "0.8", "--theta", "20",
                   "--format", "json")
    rec = obj["results"][0]
    assert rec["h_hat"] == 0.8 and rec["theta_deg"] == 20.0
    assert rec["error_estimates"]["energy"] >= 0
    assert obj["flags"] == [an.QUADRATURE]
    assert "a**5" in obj["meta"]["energy_scale"]
    assert obj["meta"]["tolerances"] == {"rel": 1e-9, "abs": 1e-12}


def test_torsion_free_ring():
    obj = run_json("torsion-free", "--body", "ring")
    assert obj["results"]["h1"] == pytest.approx(0.477847, abs=1e-6)
    assert obj["results"]["h2"] == pytest.approx(1.687206, abs=1e-6)
    assert obj["flags"] == []


def test_torsion_free_plate_is_flagged_against_quoted_value():
    obj = run_json("torsion-free", "--body", "plate")
    assert obj["results"]["h1"] == pytest.approx(0.6060114, abs=1e-7)
    assert an.PAPER_TEXT_CONFLICT in obj["flags"]


def test_repulsion_report():
    obj = run_json("repulsion", "--theta", "0", "30", "90")
    by_theta = {r["theta_deg"]: r["windows"] for r in obj["results"]}
    assert by_theta[30.0] == []
    assert by_theta[90.0][0]["hi"] == pytest.approx(math.sqrt(2 / 9), abs=1e-12)
    assert by_theta[0.0][0]["lo"] == pytest.approx(0.956342, abs=1e-6)
    assert an.PAPER_TEXT_CONFLICT in obj["flags"]


def test_critical_angles_report():
    obj = run_json("critical-angles")
    assert obj["results"]["intermediate_deg"] == pytest.approx(13.265, abs=0.01)
    assert obj["flags"] == []


def test_critical_radius_report():
    obj = run_json("critical-radius", "--theta", "0")
    assert obj["results"][0]["b_hat_star"] == pytest.approx(1.6505, abs=1e-3)
    assert obj["flags"] == []


def test_cycle_report():
    obj = run_json("cycle")
    assert abs(obj["results"]["net_work"]) <= 1e-12
    assert obj["results"]["E_C"] == pytest.approx(-9.2832, abs=1e-4)


@pytest.mark.parametrize("argv", [
    ("energy", "--h", "0.5", "--theta", "nan"),
    ("energy", "--h-range", "1", "0", "5"),
    ("energy", "--h-range", "0", "1", "1"),
    ("energy", "--body", "annulus", "--h", "0.5"),
    ("energy", "--body", "annulus", "--b", "0.5", "--h", "0.5"),
    ("energy", "--body", "cube"),
    ("energy", "--rel-tol", "0", "--h", "1"),
    ("repulsion", "--pol", "radial"),
    ("critical-radius", "--theta", "30"),
    ("frobnicate",),
    ("--config", "/nonexistent/cpring.cfg", "energy"),
])
def test_usage_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_numeric_failure_exits_3(monkeypatch):
    def broken(*args, **kwargs):
        raise QuadratureError("forced", math.nan, math.inf, 0)

    monkeypatch.setattr(cli, "body_quadrature", broken)
    assert run("energy", "--pol", "radial", "--h", "0.5")[0] == 3


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ring sweep\nbody = annulus\nb = 3\ntheta = 0 90\nh = 0.5\n")
    code, text = run("--config", str(cfg), "energy")
    assert code == 0
    recs = rows(text)
    assert [float(r["b_hat"]) for r in recs] == [3.0, 3.0]
    # explicit flags win over the file
    code, text = run("--config", str(cfg), "energy", "--b", "4")
    assert {float(r["b_hat"]) for r in rows(text)} == {4.0}


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("body ring\n")
    assert run("--config", str(cfg), "energy")[0] == 2


def test_verify_subset_text_and_json():
    code, text = run("verify", "--only", "1", "3", "9")
    assert code == 0
    assert text.count("[PASS]") == 3
    obj = run_json("verify", "--only", "10", "--format", "json")
    assert obj["results"][0]["passed"] is True


def test_verify_tighter_tolerance_gives_identical_pass_set():
    quick = ("1", "2", "3", "7", "8", "9", "10")
    base = run_json("verify", "--only", *quick, "--format", "json")
    tight = run_json("verify", "--only", *quick, "--tol", "1e-10", "--format", "json")
    assert [r["passed"] for r in base["results"]] == [r["passed"] for r in tight["results"]]


def test_verify_mutation_canary(monkeypatch):
    monkeypatch.setattr(kernel, "EXACT_RETARDATION", (13 / 4, 7.0, 63 / 4 + 1e-6))
    code, text = run("verify", "--only", "10")
    assert code == 1
    assert "[FAIL]" in text
