"""End-to-end tests of the command-line front end and experiment runner."""

import json
import math

import numpy as np
import pytest

from cpnli import config as cfg
from cpnli.cli import main
from cpnli.experiments import run


def small_doc(experiment="spectrum", grid_points=512):
    doc = cfg.default_config_dict(experiment)
    doc["source"]["grid_points"] = grid_points
    return doc


def write_doc(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(cfg.dumps(doc))
    return path


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_presets_validate_clean():
    for name, doc in cfg.preset_configs().items():
        assert cfg.validate(doc) == [], name


def test_validate_names_the_grid_rule():
    doc = small_doc()
    doc["source"]["grid_points"] = 4
    violations = cfg.validate(doc)
    assert any("grid_points" in v and "16" in v for v in violations)


def test_validate_catches_negative_jitter():
    doc = small_doc()
    doc["dcm"]["detector_jitter_ps"] = -5.0
    violations = cfg.validate(doc)
    assert any("detector_jitter" in v for v in violations)


def test_validate_catches_unknown_experiment():
    doc = small_doc()
    doc["experiment"] = "banana"
    assert any("experiment" in v for v in cfg.validate(doc))


def test_config_round_trip_idempotent():
    normalized = cfg.dumps(cfg.to_dict(cfg.from_dict(small_doc("case2"))))
    again = cfg.dumps(cfg.to_dict(cfg.from_dict(cfg.loads(normalized))))
    assert normalized == again


# ---------------------------------------------------------------------------
# Experiment runs
# ---------------------------------------------------------------------------

def test_case1_preset_summary_values(tmp_path):
    doc = cfg.preset_configs()["case1"]
    summary = run(cfg.from_dict(doc), tmp_path)
    res = summary["results"]
    assert res["schmidt_rank"] == 1
    assert res["reduced_concurrence"] == pytest.approx(1.0, abs=1e-6)
    assert (tmp_path / "spectrum.csv").exists()
    assert (tmp_path / "concurrence_sweep.csv").exists()
    assert (tmp_path / "schmidt.csv").exists()


def test_case2_preset_summary_values(tmp_path):
    doc = cfg.preset_configs()["case2"]
    summary = run(cfg.from_dict(doc), tmp_path)
    res = summary["results"]
    assert res["schmidt_rank"] == 2
    coeffs = res["schmidt_coefficients"]
    assert abs(coeffs[0] - 0.7071) < 5e-4
    assert abs(coeffs[1] - 0.7071) < 5e-4
    assert res["reduced_concurrence"] == pytest.approx(0.0, abs=0.01)
    assert res["reduced_purity"] == pytest.approx(0.5, abs=0.01)


def test_spectrum_run_deterministic_bytes(tmp_path):
    doc = small_doc("spectrum")
    run(cfg.from_dict(doc), tmp_path / "a")
    run(cfg.from_dict(doc), tmp_path / "b")
    for name in ("spectrum.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_tomography_run_outputs(tmp_path):
    doc = small_doc("tomography", grid_points=2048)
    doc["dcm"]["band_halfwidth_nm"] = 2.0
    doc["tomography"]["bootstrap_resamples"] = 4
    doc["tomography"]["brightness_cps"] = 4e3
    summary = run(cfg.from_dict(doc), tmp_path)
    for name in ("tomography_sweep.csv", "counts.csv", "density_matrix.csv", "summary.json"):
        assert (tmp_path / name).exists()
    res = summary["results"]
    assert 0.0 <= res["full_band_concurrence"] <= 1.0
    assert res["sweep_bins"] > 3
    assert np.isfinite(res["design_condition_number"])
    header = (tmp_path / "tomography_sweep.csv").read_text().splitlines()[0]
    assert header == "wavelength_nm,concurrence,concurrence_err,concurrence_ideal,converged"
    dm_lines = (tmp_path / "density_matrix.csv").read_text().splitlines()
    assert dm_lines[0] == "element_row,element_col,real,imag"
    assert len(dm_lines) == 17


def test_concurrence_sweep_run(tmp_path):
    doc = small_doc("concurrence-sweep")
    doc["pc"]["theta_rad"] = math.pi / 4.0
    summary = run(cfg.from_dict(doc), tmp_path)
    assert summary["results"]["concurrence_max"] > 0.99
    assert summary["results"]["concurrence_min"] < 0.05
    header = (tmp_path / "concurrence_sweep.csv").read_text().splitlines()[0]
    assert header == "detuning_thz,wavelength_nm,relative_phase_rad,concurrence"


# ---------------------------------------------------------------------------
# CLI process behavior
# ---------------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, capsys):
    path = write_doc(tmp_path, small_doc("spectrum"))
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(path), "--out", str(out_dir)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert "summary.json" in payload["outputs"]
    assert (out_dir / "spectrum.csv").exists()


def test_cli_validate_good_and_bad(tmp_path, capsys):
    good = write_doc(tmp_path, small_doc(), "good.json")
    assert main(["validate", "--config", str(good)]) == 0
    bad_doc = small_doc()
    bad_doc["source"]["grid_points"] = 4
    bad = write_doc(tmp_path, bad_doc, "bad.json")
    assert main(["validate", "--config", str(bad)]) == 2
    printed = capsys.readouterr().out
    assert "grid_points" in printed


def test_cli_missing_config_is_config_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2
    err = capsys.readouterr().err
    assert "CONFIG_UNREADABLE" in err


def test_cli_invalid_config_is_config_error(tmp_path, capsys):
    doc = small_doc()
    doc["dcm"]["detector_jitter_ps"] = -1.0
    path = write_doc(tmp_path, doc)
    assert main(["run", "--config", str(path)]) == 2
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_cli_experiment_and_seed_overrides(tmp_path, capsys):
    path = write_doc(tmp_path, small_doc("spectrum"))
    out_dir = tmp_path / "o"
    code = main(["run", "--config", str(path), "--experiment", "schmidt",
                 "--seed", "7", "--out", str(out_dir)])
    assert code == 0
    capsys.readouterr()
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["experiment"] == "schmidt"
    assert summary["config"]["tomography"]["seed"] == 7


def test_cli_presets_prints_documents(capsys):
    assert main(["presets"]) == 0
    docs = json.loads(capsys.readouterr().out)
    assert set(docs) == {"case1", "case2", "case1-tomography", "case2-tomography"}
    assert docs["case2"]["pc"]["theta_rad"] == pytest.approx(math.pi / 4.0)
    assert main(["presets", "--name", "case1"]) == 0
    single = json.loads(capsys.readouterr().out)
    assert single["experiment"] == "case1"
