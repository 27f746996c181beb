"""The state-vector oracle itself, pinned to frozen values and simple identities."""

import numpy as np
import pytest

from coherent_surface.lattice import build_patch
from coherent_surface.oracle import QubitOracle, enumerate_syndromes, pfaffian_bruteforce
from coherent_surface.sampler import get_sampler

# d=3, uniform theta=0.3, single round: the three most likely syndromes
FROZEN_D3 = [
    ((1, 1, 1, 1), 0.3373692802792788, -0.25749580498520336),
    ((1, -1, 1, 1), 0.15428741932910398, 0.3735955429606428),
    ((1, 1, -1, 1), 0.15428741932910392, 0.3735955429606428),
]


@pytest.fixture(scope="module")
def d3_table():
    s = get_sampler(3)
    return enumerate_syndromes(s.patch, np.full(9, 0.3), 1, s.decode2d)


def test_frozen_syndrome_table(d3_table):
    assert len(d3_table) == 16
    assert sum(p for _, p, _ in d3_table) == pytest.approx(1.0, abs=1e-12)
    by_s = {s[0]: (p, th) for s, p, th in d3_table}
    for s, p, th in FROZEN_D3:
        assert by_s[s][0] == pytest.approx(p, abs=1e-14)
        assert by_s[s][1] == pytest.approx(th, abs=1e-12)


def test_logical_states():
    orc = QubitOracle(build_patch(3))
    zero = orc.encode_logical("0").amplitudes
    one = orc.encode_logical("1").amplitudes
    assert np.allclose(orc.stabilizer_expectations(zero), 1.0)
    assert np.allclose(orc.stabilizer_expectations(one), 1.0)
    assert abs(np.vdot(zero, one)) < 1e-12
    assert np.linalg.norm(zero) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        orc.encode_logical("Q")


def test_logical_angle_of_exact_logical_rotation():
    p = build_patch(3)
    orc = QubitOracle(p)
    plus = orc.encode_logical("+").amplitudes
    zl = orc.apply_z(plus, p.z_logical_support)
    th = 0.41
    phi = np.cos(th) * plus + 1j * np.sin(th) * zl
    assert orc.logical_angle(phi) == pytest.approx(th, abs=1e-12)


def test_logical_angle_rejects_non_code_state():
    p = build_patch(3)
    orc = QubitOracle(p)
    with pytest.raises(RuntimeError):
        orc.logical_angle(orc.product_state(0))


def test_oracle_size_limit():
    with pytest.raises(ValueError):
        QubitOracle(build_patch(5))


def test_zero_angle_gives_trivial_syndrome_only():
    s = get_sampler(3)
    table = enumerate_syndromes(s.patch, np.zeros(9), 1, s.decode2d)
    assert len(table) == 1
    (hist, prob, th) = table[0]
    assert hist == ((1, 1, 1, 1),) and prob == pytest.approx(1.0) and th == pytest.approx(0.0)


def test_half_pi_angles_are_deterministic():
    # exp(i pi/2 Z) = iZ on every qubit, so the outcome is a single syndrome
    s = get_sampler(3)
    table = enumerate_syndromes(s.patch, np.full(9, np.pi / 2), 1, s.decode2d)
    assert len(table) == 1
    assert table[0][1] == pytest.approx(1.0)


def test_pfaffian_bruteforce_known_values():
    a = np.zeros((4, 4))
    a[0, 1], a[0, 2], a[0, 3], a[1, 2], a[1, 3], a[2, 3] = 1, 2, 3, 4, 5, 6
    a = a - a.T
    # af - be + cd with (a..f) = (1, 2, 3, 4, 5, 6)
    assert pfaffian_bruteforce(a) == 1 * 6 - 2 * 5 + 3 * 4
