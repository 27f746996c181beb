import numpy as np
import pytest

from coherent_surface.decoder import build_detection_graph
from coherent_surface.incoherent import (
    FailureEstimate,
    estimate_failure,
    logical_failures,
    sample_errors,
    simulate_incoherent_shot,
)
from coherent_surface.lattice import build_patch


def test_failure_estimate_properties():
    e = FailureEstimate(3, 0.01, 0.01, 100, 25)
    assert e.p_fail == 0.25
    assert e.stderr == pytest.approx(np.sqrt(0.25 * 0.75 / 100))


def test_noiseless_never_fails():
    est = estimate_failure(5, 0.0, 0.0, 500, np.random.default_rng(0))
    assert est.failures == 0


def test_sample_errors_shapes_and_clean_last_round():
    p = build_patch(3)
    err, s = sample_errors(p, 0.0, 0.4, 200, np.random.default_rng(1))
    assert err.shape == (200, 9) and s.shape == (200, 3, 4)
    assert not err.any()
    assert np.all(s[:, -1] == 1)
    assert np.any(s[:, :-1] == -1)


def test_logical_failures_flags_top_row():
    p = build_patch(3)
    err = np.zeros((2, 9), dtype=np.uint8)
    err[1, list(p.z_logical_support)] = 1
    corr = np.zeros_like(err)
    assert logical_failures(p, err, corr).tolist() == [False, True]
    bad = np.zeros_like(err)
    bad[0, 4] = 1
    with pytest.raises(RuntimeError):
        logical_failures(p, err, bad)


def test_batch_matches_plain_reference():
    """Vectorized sampler + PyMatching vs a plain per-shot loop with the blossom decoder."""
    d, p, q, shots = 3, 0.02, 0.02, 20000
    fast = estimate_failure(d, p, q, shots, np.random.default_rng(10))
    patch = build_patch(d)
    graph = build_detection_graph(patch, d, p, q)
    rng = np.random.default_rng(11)
    slow = sum(simulate_incoherent_shot(patch, p, q, rng, graph) for _ in range(shots))
    sigma = np.hypot(fast.stderr, np.sqrt(slow * (1 - slow / shots)) / shots)
    assert abs(fast.p_fail - slow / shots) < 3 * sigma


def test_monotone_in_p_and_q():
    rng = np.random.default_rng(5)
    base = estimate_failure(3, 0.02, 0.02, 20000, rng).p_fail
    more_p = estimate_failure(3, 0.04, 0.02, 20000, rng).p_fail
    more_q = estimate_failure(3, 0.02, 0.06, 20000, rng).p_fail
    assert more_p > base and more_q > base


def test_q0_single_round_is_2d_decoding():
    """At q = 0 the 3D decoder on a one-round graph is the 2D decoder on that round."""
    from coherent_surface.decoder import decode2d, detection_events, mwpm_decode

    patch = build_patch(5)
    g = build_detection_graph(patch, 1, 0.05, 0.0)
    dec = decode2d(patch, 0.05)
    rng = np.random.default_rng(2)
    for _ in range(50):
        s = patch.x_syndrome(np.flatnonzero(rng.random(25) < 0.1))
        assert mwpm_decode(g, detection_events(s[None])).z_support == tuple(dec(s))
