import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherent_surface.lattice import build_patch
from coherent_surface.oracle import QubitOracle, enumerate_syndromes
from coherent_surface.sampler import CoherentSampler, get_sampler, syndrome_from_m
from coherent_surface.validation import angle_gap


def test_syndrome_from_m_trivial_and_single_flip():
    p = build_patch(5)
    assert np.all(syndrome_from_m(np.ones(25, dtype=np.int8), p) == 1)
    m = np.ones(25, dtype=np.int8)
    m[12] = -1  # bulk qubit
    s = syndrome_from_m(m, p)
    assert sorted(np.flatnonzero(s == -1).tolist()) == sorted(p.qubit_x_faces[12])
    assert len(p.qubit_x_faces[12]) == 2


@given(st.lists(st.sampled_from([1, -1]), min_size=9, max_size=9))
def test_syndrome_from_m_is_face_product(bits):
    p = build_patch(3)
    m = np.array(bits, dtype=np.int8)
    expected = [int(np.prod(m[list(f)])) for f in p.x_faces]
    assert syndrome_from_m(m, p).tolist() == expected


def test_zero_angles_give_trivial_syndrome():
    # |+_L> is not an X-basis product state, so m is random while s is always trivial
    s = get_sampler(5)
    rng = np.random.default_rng(0)
    for _ in range(20):
        draw = s.sample_m(np.zeros(25), rng)
        assert np.all(syndrome_from_m(draw.m, s.patch) == 1)
        assert draw.m[list(s.patch.x_logical_support)].prod() == 1


def test_angle_shape_checked():
    with pytest.raises(ValueError):
        get_sampler(3).sample_m(np.zeros(8), np.random.default_rng(0))
    with pytest.raises(ValueError):
        CoherentSampler(3, engine="gpu")


@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5]))
@settings(max_examples=25)
def test_active_and_dense_engines_agree(seed, d):
    active, dense = get_sampler(d, "active"), get_sampler(d, "dense")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(-0.6, 0.6, d * d)
    a = active.sample_m(angles, np.random.default_rng(seed))
    b = dense.sample_m(angles, np.random.default_rng(seed))
    assert np.array_equal(a.m, b.m)
    assert a.log_prob == pytest.approx(b.log_prob, abs=1e-10)
    assert np.allclose(a.ps, b.ps, atol=1e-10)


def test_sampled_probabilities_match_state_vector():
    """Each sampled string's recorded probability is its exact X-basis probability."""
    s = get_sampler(3)
    angles = np.linspace(-0.4, 0.5, 9)
    orc = QubitOracle(s.patch)
    probs = orc.x_basis_probabilities(orc.apply_rotation(orc.encode_logical("+").amplitudes, angles))
    rng = np.random.default_rng(0)
    for _ in range(200):
        draw = s.sample_m(angles, rng)
        idx = sum(1 << q for q in range(9) if draw.m[q] == -1)
        assert math.exp(draw.log_prob) == pytest.approx(probs[idx], abs=1e-14)
        # the forced pass returns the same weight up to the constant 2^-(n-1)
        assert math.exp(s.forced_log_weight(angles, draw.m)) == pytest.approx(probs[idx] / 256, rel=1e-9)


def test_exact_syndrome_probabilities_d3():
    from coherent_surface.validation import exact_syndrome_table

    s = get_sampler(3)
    angles = np.full(9, 0.3)
    table = enumerate_syndromes(s.patch, angles, 1, s.decode2d)
    flo_table = exact_syndrome_table(s, angles)
    for hist, p, _ in table:
        assert flo_table[hist[0]] == pytest.approx(p, abs=1e-12)


def test_branch_probabilities_not_always_half():
    s = get_sampler(3)
    draw = s.sample_m(np.full(9, 0.3), np.random.default_rng(3))
    assert np.all((draw.ps >= 0) & (draw.ps <= 1 + 1e-12))
    assert not np.allclose(draw.ps, 0.5)


def test_logical_angle_trivial_cases():
    assert get_sampler(3).logical_angle(np.zeros(9)) == pytest.approx(0.0, abs=1e-14)
    for th in (0.1, -0.7, 1.2):
        assert angle_gap(get_sampler(1).logical_angle([th]), th) < 1e-12


def test_logical_angle_per_syndrome_matches_oracle():
    s = get_sampler(3)
    angles = np.full(9, 0.3)
    for hist, _, th in enumerate_syndromes(s.patch, angles, 1, s.decode2d):
        corr = s.decode2d(np.array(hist[0]))
        assert angle_gap(s.logical_angle(angles, corr), th) < 1e-8


def test_logical_angle_inhomogeneous_matches_oracle():
    s = get_sampler(3)
    angles = np.random.default_rng(7).uniform(-0.5, 0.5, 9)
    for hist, _, th in enumerate_syndromes(s.patch, angles, 1, s.decode2d):
        assert angle_gap(s.logical_angle(angles, s.decode2d(np.array(hist[0]))), th) < 1e-8


def test_syndrome_probabilities_independent_of_initial_logical_state():
    s = get_sampler(3)
    angles = np.full(9, 0.25)
    tables = {}
    for state in ("+", "Y"):
        acc: dict = {}
        for bits in itertools.product((1, -1), repeat=9):
            m = np.array(bits)
            lw = s.forced_log_weight(angles, m, state)
            key = tuple(syndrome_from_m(m, s.patch).tolist())
            acc[key] = acc.get(key, 0.0) + (math.exp(lw) if np.isfinite(lw) else 0.0)
        tables[state] = acc
    assert tables["+"].keys() == tables["Y"].keys()
    for k in tables["+"]:
        assert tables["+"][k] == pytest.approx(tables["Y"][k], abs=1e-14)


def test_multiround_theta_star_matches_oracle():
    s = get_sampler(3)
    table = enumerate_syndromes(s.patch, np.full(9, 0.2), 2, s.decode2d)
    assert sum(p for _, p, _ in table) == pytest.approx(1.0, abs=1e-12)
    for hist, _, th in table:
        assert angle_gap(s.history_angles(0.2, hist).sum(), th) < 1e-8


def test_rounds_record_zero_theta():
    rec = get_sampler(3).sample_rounds(0.0, 3, np.random.default_rng(0), keep_m=True)
    assert np.all(rec.s_rounds == 1)
    assert rec.theta_star == 0.0
    assert rec.m_rounds.shape == (3, 9)


def test_single_round_equals_sample_m():
    s = get_sampler(3)
    rec = s.sample_rounds(0.3, 1, np.random.default_rng(4), keep_m=True)
    draw = s.sample_m(np.full(9, 0.3), np.random.default_rng(4))
    assert np.array_equal(rec.m_rounds[0], draw.m)


def test_trace_lines(tmp_path):
    import json

    path = tmp_path / "trace.jsonl"
    with open(path, "w") as fh:
        get_sampler(3).sample_rounds(0.3, 3, np.random.default_rng(0), trace=fh)
    lines = [json.loads(x) for x in path.read_text().splitlines()]
    assert [x["round"] for x in lines] == [1, 2, 3]
    assert {"m", "log_prob", "ps", "syndrome", "correction", "theta_round"} <= set(lines[0])


@pytest.mark.slow
def test_empirical_distribution_tvd():
    s = get_sampler(3)
    angles = np.full(9, 0.3)
    exact = {h[0]: p for h, p, _ in enumerate_syndromes(s.patch, angles, 1, s.decode2d)}
    rng = np.random.default_rng(2024)
    counts: dict = {}
    shots = 20000
    for _ in range(shots):
        key = tuple(int(x) for x in syndrome_from_m(s.sample_m(angles, rng).m, s.patch))
        counts[key] = counts.get(key, 0) + 1
    tvd = 0.5 * sum(abs(counts.get(k, 0) / shots - exact.get(k, 0.0)) for k in set(exact) | set(counts))
    assert tvd < 0.02
