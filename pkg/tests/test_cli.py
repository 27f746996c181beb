import json

import pytest

from coherent_surface.cli import EXIT_CONFIG, EXIT_OK, main


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"d_list": [3], "p_list": [0.02], "q_equals_p": True, "shots_noiseless": 20,
                                "resamples_readout": 4, "master_seed": 1}))  # fmt: skip
    return path


def test_simulate_and_trace(tmp_path, config, capsys):
    out = tmp_path / "r.csv"
    trace = tmp_path / "t.jsonl"
    assert main(["simulate", "--config", str(config), "--out", str(out), "--trace", str(trace), "--trace-shots", "2"]) == EXIT_OK
    assert out.exists() and out.with_suffix(".manifest.json").exists()
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert any("theta_star" in x for x in lines)


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"d_list": [4], "p_list": [0.01]}))
    assert main(["simulate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_validate_passes(capsys):
    assert main(["validate"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_dump_lattice(capsys):
    assert main(["validate", "--dump-lattice", "3"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["majorana_count"] == 36


def test_threshold_map_needs_input(capsys):
    assert main(["threshold-map"]) == EXIT_CONFIG


def test_fit_and_diamond_on_synthetic_csv(tmp_path, capsys):
    import numpy as np

    from coherent_surface.metrics import MetricEstimate, scaling_ansatz

    rows = []
    for d in (3, 5, 7, 9):
        for p in np.linspace(0.016, 0.034, 10):
            y = float(scaling_ansatz((p, d), 0.026, 1.3, 0.15, 2.5, 3.0))
            rows.append(MetricEstimate(d=d, p=float(p), q=float(p), theta=0.0, shots=100, resamples=1, pli=y,
                                       pli_err=0.002, pld=2 * np.sqrt(y), pld_err=0.004))  # fmt: skip
    path = tmp_path / "syn.csv"
    from coherent_surface.metrics import CSV_COLUMNS

    path.write_text(",".join(CSV_COLUMNS) + "\n" + "".join(",".join(r.csv_row()) + "\n" for r in rows))
    fit_out = tmp_path / "fit.json"
    assert main(["threshold-fit", "--input", str(path), "--out", str(fit_out)]) == EXIT_OK
    assert json.loads(fit_out.read_text())["p_th"] == pytest.approx(0.026, abs=1e-4)
    assert main(["diamond-analysis", "--input", str(path)]) == EXIT_OK
    assert main(["threshold-map", "--input", str(path), "--map-out", str(tmp_path / "m.json")]) == EXIT_OK
