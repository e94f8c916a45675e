import json
import math
import shutil
import subprocess

import pytest
from click.testing import CliRunner

from dotgates.cli import main, round_floats

RUNNER = CliRunner()


def _invoke(args):
    return RUNNER.invoke(main, args, catch_exceptions=False)


def _text(result):
    try:
        return result.output + result.stderr
    except (ValueError, AttributeError):
        return result.output


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(c) for c in line.split(",")] for line in lines[1:]]
    return header, rows


def test_round_floats_normalizes_nested_values():
    obj = {"a": 0.1234567890123456, "b": [1.0, {"c": 2e-300}], "d": "s",
           "e": 7, "f": None, "g": True}
    out = round_floats(obj)
    assert out["a"] == float("%.12g" % 0.1234567890123456)
    assert out["b"][1]["c"] == 2e-300
    assert out["d"] == "s" and out["e"] == 7 and out["f"] is None
    assert out["g"] is True
    # idempotent: rounding an already-rounded tree changes nothing
    assert round_floats(out) == out


def test_cphase_writes_report_and_trajectories(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["cphase", "--out", str(out)])
    assert result.exit_code == 0, _text(result)
    assert "wrote" in result.output
    names = sorted(p.name for p in out.iterdir())
    assert names == ["report.json", "traj_00.csv", "traj_01.csv",
                     "traj_10.csv", "traj_11.csv"]
    report = json.loads((out / "report.json").read_text())
    assert report["kind"] == "cphase"
    assert report["fidelity"] == pytest.approx(0.994363760415689, abs=1e-9)
    assert report["theta"] == pytest.approx(-2.849673475814201, abs=1e-9)
    assert report["pulse"]["shape"] == "square"
    assert report["warnings"] == []


def test_cphase_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = _invoke(["cphase", "--out", str(out)])
        assert result.exit_code == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "traj_11.csv").read_bytes() == (b / "traj_11.csv").read_bytes()


def test_cphase_trajectory_csv_columns(tmp_path):
    out = tmp_path / "run"
    assert _invoke(["cphase", "--out", str(out)]).exit_code == 0
    header, rows = _read_csv(out / "traj_11.csv")
    assert header[0] == "t_ps"
    assert "re_11" in header and "im_11" in header and "phase_11" in header
    re_cols = [i for i, h in enumerate(header) if h.startswith("re_")]
    im_cols = [i for i, h in enumerate(header) if h.startswith("im_")]
    for row in rows[:: max(1, len(rows) // 20)]:
        norm = sum(row[i] ** 2 for i in re_cols) + sum(row[i] ** 2 for i in im_cols)
        assert norm == pytest.approx(1.0, abs=2e-6)
    assert rows[-1][header.index("phase_11")] == pytest.approx(
        -3.107928498975977, abs=1e-6)


def test_config_file_with_set_override_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "cphase", "omega": 0.2}))
    out = tmp_path / "run"
    result = _invoke(["cphase", "--config", str(cfg), "--out", str(out),
                      "--set", "omega=0.1"])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    # --set wins over the file: the slower drive needs the longer gate
    assert report["gate_time"] == pytest.approx(29.24358673002839, rel=1e-9)


def test_unknown_key_fails_with_suggestion(tmp_path):
    result = _invoke(["cphase", "--out", str(tmp_path / "x"),
                      "--set", "omge=0.1"])
    assert result.exit_code == 1
    text = _text(result)
    assert "config error" in text
    assert "omega" in text  # close-match hint


def test_kind_mismatch_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "raman"}))
    result = _invoke(["cphase", "--config", str(cfg),
                      "--out", str(tmp_path / "x")])
    assert result.exit_code == 1
    assert "config error" in _text(result)


def test_invalid_json_reports_position(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"kind": "cphase",\n  omega: 0.1}')
    result = _invoke(["cphase", "--config", str(cfg),
                      "--out", str(tmp_path / "x")])
    assert result.exit_code == 1
    assert "line" in _text(result)


def test_missing_config_file_is_config_error(tmp_path):
    result = _invoke(["cphase", "--config", str(tmp_path / "absent.json"),
                      "--out", str(tmp_path / "x")])
    assert result.exit_code == 1
    assert "config error" in _text(result)


def test_wrong_pulse_area_is_runtime_error(tmp_path):
    result = _invoke(["cphase", "--out", str(tmp_path / "x"),
                      "--set", "duration=20"])
    assert result.exit_code == 2
    assert "runtime error" in _text(result)


def test_zero_duration_run_writes_single_row(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["cphase", "--out", str(out),
                      "--set", "omega=0", "--set", "duration=0"])
    assert result.exit_code == 0
    text = (out / "traj_11.csv").read_text().strip().splitlines()
    assert len(text) == 2  # header plus the single sample
    assert "nan" in text[1]  # phase is undefined on a single sample


def test_conditions_report(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["conditions", "--out", str(out), "--set", "omega=0.2"])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    cond = report["conditions"]
    assert cond["r_spectator"] == pytest.approx(0.11764705882352942, rel=1e-9)
    assert cond["spectator_ok"] is False
    assert cond["biexciton_ok"] is True
    assert report["pulse"]["shape"] == "square"
    assert sorted(p.name for p in out.iterdir()) == ["report.json"]


def test_zrot_outputs(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["zrot", "--out", str(out), "--set", "wait=0.05"])
    assert result.exit_code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["report.json", "trajectory_lab.csv", "trajectory_rot.csv"]
    report = json.loads((out / "report.json").read_text())
    assert report["kind"] == "zrot"
    assert report["target_phase"] == pytest.approx(1.1302974273026685, abs=1e-9)
    assert abs(report["phase_error"]) < 1e-6
    assert abs(report["composite_phase"]) == pytest.approx(math.pi, abs=1e-5)
    header, rows = _read_csv(out / "trajectory_rot.csv")
    assert "re_X" in header and header[0] == "t_ps"
    assert len(rows) > 100


def test_raman_population_csv(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["raman", "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["fidelity"] == pytest.approx(0.9565232098141527, abs=1e-9)
    assert report["pi_time"] == pytest.approx(9.365697321865879, abs=1e-6)
    header, rows = _read_csv(out / "populations.csv")
    for lbl in ("0", "1", "e", "s"):
        assert f"pop_{lbl}" in header
    pop_cols = [i for i, h in enumerate(header) if h.startswith("pop_")]
    for row in rows[:: max(1, len(rows) // 20)]:
        assert sum(row[i] for i in pop_cols) == pytest.approx(1.0, abs=1e-6)
        assert all(row[i] >= -1e-9 for i in pop_cols)


def test_raman_family_outputs(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["raman", "--out", str(out), "--set", "detunings=[2, 4]"])
    assert result.exit_code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["raman_nu_2_gamma_0.1.csv", "raman_nu_4_gamma_0.1.csv",
                     "report.json", "schema.json"]
    report = json.loads((out / "report.json").read_text())
    assert report["kind"] == "raman_family"
    by_nu = {r["detuning"]: r for r in report["runs"]}
    assert by_nu[2.0]["fidelity"] == pytest.approx(0.9184818519264073, abs=1e-9)
    assert by_nu[4.0]["fidelity"] == pytest.approx(0.9565232098141527, abs=1e-9)
    # losing less to the intermediate level at larger detuning, but slower
    assert by_nu[4.0]["pi_time"] > by_nu[2.0]["pi_time"]
    schema = json.loads((out / "schema.json").read_text())
    assert schema["files"] == [r["file"] for r in report["runs"]]


def test_cphase_family_outputs(tmp_path):
    out = tmp_path / "run"
    result = _invoke(["cphase", "--out", str(out), "--set", "ratios=[0.05]"])
    assert result.exit_code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["family_ratio_0.05.csv", "report.json", "schema.json"]
    report = json.loads((out / "report.json").read_text())
    run = report["runs"][0]
    assert run["omega"] == pytest.approx(0.05 * 0.85)
    assert run["fidelity"] == pytest.approx(0.9987213204406525, abs=1e-9)
    header, rows = _read_csv(out / "family_ratio_0.05.csv")
    assert header == ["t_ps", "phase_10", "amp_10", "phase_11", "amp_11"]
    assert rows[-1][0] == pytest.approx(run["gate_time"], rel=1e-9)
    assert rows[-1][1] == pytest.approx(-0.05497491612349329, abs=1e-6)
    assert rows[-1][4] == pytest.approx(1.0, abs=1e-6)


def test_sweep_serial(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "kind": "sweep", "sweep_kind": "raman",
        "sweep_param": "detuning", "sweep_values": [2.0, 4.0],
    }))
    out = tmp_path / "run"
    result = _invoke(["sweep", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["sweep_param"] == "detuning"
    assert [r["value"] for r in report["runs"]] == [2.0, 4.0]
    assert [r["dir"] for r in report["runs"]] == ["detuning_2", "detuning_4"]
    for d in ("detuning_2", "detuning_4"):
        child = json.loads((out / d / "report.json").read_text())
        assert child["kind"] == "raman"
        assert (out / d / "populations.csv").exists()
    assert report["runs"][1]["report"]["fidelity"] == pytest.approx(
        0.9565232098141527, abs=1e-9)


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "kind": "sweep", "sweep_kind": "raman",
        "sweep_param": "detuning", "sweep_values": [2.0, 4.0],
    }))
    serial, parallel = tmp_path / "s", tmp_path / "p"
    assert _invoke(["sweep", "--config", str(cfg), "--out", str(serial)]).exit_code == 0
    assert _invoke(["sweep", "--config", str(cfg), "--out", str(parallel),
                    "--jobs", "2"]).exit_code == 0
    assert (serial / "report.json").read_bytes() == (parallel / "report.json").read_bytes()
    assert (serial / "detuning_4" / "populations.csv").read_bytes() == \
        (parallel / "detuning_4" / "populations.csv").read_bytes()


def test_sweep_with_no_values_writes_nothing(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "kind": "sweep", "sweep_kind": "raman",
        "sweep_param": "detuning", "sweep_values": [],
    }))
    out = tmp_path / "run"
    result = _invoke(["sweep", "--config", str(cfg), "--out", str(out)])
    assert result.exit_code == 0
    assert "nothing to run" in result.output
    assert not out.exists()


def test_sweep_rejects_bad_parameter(tmp_path):
    base = {"kind": "sweep", "sweep_kind": "raman", "sweep_values": [1.0]}
    for param in ("bogus", "detunings"):  # unknown, and not sweepable
        cfg = tmp_path / f"{param}.json"
        cfg.write_text(json.dumps({**base, "sweep_param": param}))
        result = _invoke(["sweep", "--config", str(cfg),
                          "--out", str(tmp_path / param)])
        assert result.exit_code == 1
        assert "config error" in _text(result)


def test_verify_accepts_good_run_and_catches_corruption(tmp_path):
    out = tmp_path / "run"
    assert _invoke(["raman", "--out", str(out)]).exit_code == 0
    result = _invoke(["verify", "--out", str(out)])
    assert result.exit_code == 0
    assert "0 failures" in result.output

    # inflate one population cell: the row no longer sums to one
    path = out / "populations.csv"
    lines = path.read_text().strip().splitlines()
    cells = lines[5].split(",")
    cells[1] = "%.11e" % (float(cells[1]) + 0.5)
    lines[5] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    result = _invoke(["verify", "--out", str(out)])
    assert result.exit_code == 2
    assert "FAIL" in result.output

    (out / "report.json").write_text("{broken")
    result = _invoke(["verify", "--out", str(out)])
    assert "invalid JSON" in result.output
    assert result.exit_code == 2


def test_verify_missing_directory(tmp_path):
    result = _invoke(["verify", "--out", str(tmp_path / "absent")])
    assert result.exit_code == 1


def test_installed_entry_point_runs():
    exe = shutil.which("dotgates")
    assert exe, "console script not on PATH"
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("cphase", "zrot", "raman", "conditions", "sweep", "verify"):
        assert sub in proc.stdout
