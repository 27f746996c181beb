import json

import numpy as np
import pytest

from coherent_surface.decoder import build_detection_graph, detection_events, logical_class, mwpm_decode
from coherent_surface.experiments import (
    ConfigError,
    SweepConfig,
    noiseless_seed,
    read_baseline,
    read_estimates,
    readout_angles,
    run_noiseless,
    run_sweep,
)
from coherent_surface.lattice import build_patch
from coherent_surface.sampler import get_sampler


def small_config(tmp_path, **kw):
    base = dict(d_list=[3], p_list=[0.02], q_equals_p=True, shots_noiseless=100, resamples_readout=10,
                master_seed=7, output=str(tmp_path / "out.csv"), chunk=30)  # fmt: skip
    base.update(kw)
    return SweepConfig(**base)


@pytest.mark.parametrize(
    "bad",
    [dict(d_list=[4]), dict(d_list=[]), dict(mode="quantum"), dict(shots_noiseless=0), dict(p_list=[0.6])],
)
def test_config_validation(tmp_path, bad):
    with pytest.raises(ConfigError):
        small_config(tmp_path, **bad)


def test_theta_and_p_lists_are_linked(tmp_path):
    cfg = small_config(tmp_path, p_list=[], theta_list=[0.1])
    assert cfg.rates() == pytest.approx([np.sin(0.1) ** 2])
    cfg = small_config(tmp_path)
    assert cfg.thetas() == pytest.approx([np.arcsin(np.sqrt(0.02))])


def test_from_json_rejects_unknown_keys(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"d_list": [3], "p_list": [0.01], "shots": 5}))
    with pytest.raises(ConfigError):
        SweepConfig.from_json(path)


def test_smoke_sweep_writes_row_and_manifest(tmp_path):
    res = run_sweep(small_config(tmp_path))
    rows = read_estimates(res.csv_path)
    assert len(rows) == 1
    assert rows[0].shots == 100 and rows[0].resamples == 10
    man = json.loads(res.manifest_path.read_text())
    assert man["master_seed"] == 7 and "wall_time_s" in man and man["version"].startswith("coherent_surface")


def test_rerun_is_byte_identical(tmp_path):
    a = run_sweep(small_config(tmp_path, output=str(tmp_path / "a.csv")))
    b = run_sweep(small_config(tmp_path, output=str(tmp_path / "b.csv"), chunk=17))
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()


def test_worker_count_does_not_change_output(tmp_path):
    a = run_sweep(small_config(tmp_path, output=str(tmp_path / "a.csv"), workers=1))
    b = run_sweep(small_config(tmp_path, output=str(tmp_path / "b.csv"), workers=2))
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()


def test_baseline_and_incoherent_mode(tmp_path):
    res = run_sweep(small_config(tmp_path, baseline_shots=2000))
    assert res.baseline_path is not None
    assert len(read_baseline(res.baseline_path)) == 1
    assert np.isfinite(res.estimates[0].twirl_i)
    inc = run_sweep(small_config(tmp_path, mode="incoherent", output=str(tmp_path / "inc.csv")))
    (row,) = read_baseline(inc.csv_path)
    assert row["shots"] == 100


def test_zero_theta_gives_exact_zero(tmp_path):
    res = run_sweep(small_config(tmp_path, p_list=[0.0], q_equals_p=False, q_list=[0.0, 0.05]))
    for e in res.estimates:
        assert e.pli == 0.0 and e.pld == 0.0


def test_q0_single_round_equals_perfect_readout(tmp_path):
    """Shot for shot: the sweep pipeline at q=0, rounds=1 is the 2D perfect-readout model."""
    d, p, master = 3, 0.03, 11
    theta = float(np.arcsin(np.sqrt(p)))
    ts, s_all, c_last = run_noiseless(d, p, theta, master, 50, rounds=1)
    patch = build_patch(d)
    th = readout_angles(patch, ts, s_all, c_last, 0.0, p, master, 3)
    sampler = get_sampler(d)
    for i in range(50):
        rec = sampler.sample_rounds(theta, 1, np.random.default_rng(noiseless_seed(master, d, p, i)))
        expected = sampler.logical_angle(np.full(9, theta), rec.corrections[0])
        assert np.all(np.abs(th[i] - expected) < 1e-12)


def test_readout_decoding_keeps_class_consistent(tmp_path):
    d, p, q, master = 3, 0.03, 0.05, 3
    theta = float(np.arcsin(np.sqrt(p)))
    ts, s_all, c_last = run_noiseless(d, p, theta, master, 20)
    patch = build_patch(d)
    th = readout_angles(patch, ts, s_all, c_last, q, p, master, 4)
    assert th.shape == (20, 4)
    # the angle is theta* or theta* + pi/2
    diff = np.mod(th - ts[:, None] + 1e-9, np.pi / 2)
    assert np.all(diff < 1e-8)
    g = build_detection_graph(patch, d, p, q)
    corr = mwpm_decode(g, detection_events(s_all[0]))
    total = set(corr.z_support) ^ set(np.flatnonzero(c_last[0]))
    assert logical_class(total, patch) in (0, 1)
