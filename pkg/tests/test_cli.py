import csv
import json

import numpy as np
import pytest

from qbattery.battery import gibbs_state, ising_battery, thermal_mixture_state
from qbattery.cli import main
from qbattery.runner import ExperimentConfig, run_histogram, run_tpm_sweep, run_variance_sweep
from qbattery.witness import detect_schmidt_number


def _read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        assert first.startswith("# schema=qbattery.")
        return list(csv.DictReader(fh))


def test_variance_sweep_single_point_matches_direct_call():
    cfg = ExperimentConfig.from_dict(
        {
            "protocol": "variance",
            "parameters": {"b_grid": [0.45], "alpha_grid": [0.96]},
        }
    )
    rows = run_variance_sweep(cfg)
    assert len(rows) == 1
    h = ising_battery(0.5, 1.0, 0.5, 0.45)
    rho = thermal_mixture_state(0.96, gibbs_state(h.ha, 1.5), gibbs_state(h.hb, 1.5))
    rep = detect_schmidt_number(rho, h)
    assert rows[0]["variance"] == rep.variance_used
    assert rows[0]["detected_sn"] == rep.detected_sn_lower_bound
    assert rows[0]["bound_k3"] == dict(rep.thresholds)[3]


def test_variance_sweep_default_grid_contains_detection_endpoints():
    rows = run_variance_sweep(ExperimentConfig())
    hot = [r for r in rows if r["b"] == 0.45 and r["alpha"] == 0.96]
    cold = [r for r in rows if r["b"] == 0.45 and r["alpha"] == 0.08]
    assert hot and cold
    assert hot[0]["variance"] > hot[0]["bound_k3"]
    assert cold[0]["variance"] <= cold[0]["bound_k1"]
    for r in rows:
        if r["alpha"] == 0.0:
            assert r["detected_sn"] == 1  # product states never detect


def test_tpm_sweep_rows():
    cfg = ExperimentConfig.from_dict(
        {
            "protocol": "tpm",
            "parameters": {"eps_grid": [0.2, 0.5, 1.0], "alpha_grid": [0.0, 0.5, 1.0]},
        }
    )
    rows = run_tpm_sweep(cfg)
    assert len(rows) == 9
    for r in rows:
        assert abs(r["n0"] + r["n1"] + r["n_noisy"] - 1) < 1e-12
        assert r["var_tpm"] <= r["var_diag"] + 1e-12
    # weaker detectors stay closer to the ideal curve for this family
    by_alpha = {}
    for r in rows:
        by_alpha.setdefault(r["alpha"], {})[r["eps_a"]] = r["var_tpm"]
    for curves in by_alpha.values():
        assert curves[0.2] >= curves[0.5] - 1e-15 >= curves[1.0] - 2e-15


def test_histogram_counts_and_summary(tmp_path):
    cfg = ExperimentConfig.from_dict(
        {
            "protocol": "histogram",
            "parameters": {"bin_width": 0.1},
            "sampling": {"seed": 5, "n_unitaries": 2000},
        }
    )
    rows, summary = run_histogram(cfg)
    assert sum(r["count"] for r in rows) == 2000
    assert summary["n_samples"] == 2000
    assert summary["variance"] > 0


def test_cli_witness_json(capsys):
    assert main(["witness", "--alpha", "0.96", "--b", "0.45"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["detected_sn_lower_bound"] == 4


def test_cli_sweep_csv_file(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(
        json.dumps(
            {
                "protocol": "variance",
                "parameters": {"b_grid": [0.45], "alpha_grid": [0.08, 0.96]},
            }
        )
    )
    out = tmp_path / "rows.csv"
    assert main(["sweep", "--config", str(config), "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert len(rows) == 2
    assert {r["alpha"] for r in rows} == {"0.08", "0.96"}
    assert rows[1]["detected_sn"] == "4"


def test_cli_seeded_rerun_is_identical(tmp_path, capsys):
    args = ["tpm", "--alpha", "0.5", "--eps", "0.5", "--seed", "42", "--n", "1000"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    second = capsys.readouterr().out
    assert first == second
    payload = json.loads(first)
    assert abs(payload["mc"]["variance"] - payload["var_tpm"]) < 5 * payload["mc"]["se_variance"]


def test_cli_histogram_requires_seed(capsys):
    assert main(["histogram", "--n", "100"]) == 1
    assert "seed" in capsys.readouterr().err


def test_cli_missing_config_file(capsys):
    assert main(["variance", "--config", "/nonexistent/path.json"]) == 1


def test_cli_bad_config_key(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"protocl": "variance"}))
    assert main(["variance", "--config", str(config)]) == 1
    assert "protocl" in capsys.readouterr().err


def test_cli_verify_passes_and_is_deterministic(capsys):
    args = ["verify", "--n", "1500", "--seed", "99"]
    assert main(args) == 0
    first = capsys.readouterr().out
    report = json.loads(first)
    assert report["passed"] and all(c["passed"] for c in report["checks"])
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_cli_verify_corrupted_tolerance_fails(tmp_path, capsys):
    config = tmp_path / "verify.json"
    config.write_text(
        json.dumps(
            {
                "protocol": "verify",
                "parameters": {"n": 1500, "se_multiplier": 1e-6},
                "sampling": {"seed": 99},
            }
        )
    )
    assert main(["verify", "--config", str(config)]) == 2
    report = json.loads(capsys.readouterr().out)
    failing = [c for c in report["checks"] if not c["passed"]]
    assert failing and all(c["deviation"] > c["threshold"] for c in failing)


def test_cli_coincidence_point(capsys):
    assert main(["coincidence", "--alpha", "0.7", "--eps", "0.6"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["slack"] >= -1e-12
    assert 0 <= out["cbar_closed"] <= 1


def test_cli_histogram_json(tmp_path):
    out = tmp_path / "hist.json"
    assert (
        main(
            [
                "histogram",
                "--alpha",
                "0.96",
                "--b",
                "0.45",
                "--seed",
                "7",
                "--n",
                "1000",
                "--bin-width",
                "0.1",
                "--format",
                "json",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    payload = json.loads(out.read_text())
    assert sum(b["count"] for b in payload["bins"]) == 1000
    assert payload["summary"]["n_samples"] == 1000
