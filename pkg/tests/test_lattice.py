import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherent_surface.lattice import build_majorana_network, build_patch, dump_json, face_link_product
from coherent_surface.majorana import bilinear, product

odd_d = st.sampled_from([1, 3, 5, 7])


def test_d3_faces_frozen():
    p = build_patch(3)
    assert p.x_faces == ((1, 2), (0, 1, 3, 4), (4, 5, 7, 8), (6, 7))
    assert p.z_faces == ((0, 3), (1, 2, 4, 5), (3, 4, 6, 7), (5, 8))
    assert p.x_logical_support == (0, 3, 6)
    assert p.z_logical_support == (0, 1, 2)


@pytest.mark.parametrize("bad", [0, 2, -3, 4.0, "3"])
def test_rejects_bad_distance(bad):
    with pytest.raises(ValueError):
        build_patch(bad)


@given(odd_d)
def test_face_counts_and_commutation(d):
    p = build_patch(d)
    assert len(p.x_faces) == len(p.z_faces) == (d * d - 1) // 2
    hx, hz = p.x_check_matrix, p.z_check_matrix
    assert not np.any((hx.astype(int) @ hz.T.astype(int)) % 2)
    zl = np.zeros(p.n, dtype=int)
    zl[list(p.z_logical_support)] = 1
    xl = np.zeros(p.n, dtype=int)
    xl[list(p.x_logical_support)] = 1
    # logical Z commutes with X checks, logical X with Z checks, and they anticommute
    assert not np.any(hx.astype(int) @ zl % 2)
    assert not np.any(hz.astype(int) @ xl % 2)
    assert zl @ xl % 2 == 1


@given(odd_d)
def test_every_qubit_in_one_or_two_x_faces(d):
    p = build_patch(d)
    counts = p.x_check_matrix.sum(axis=0)
    if d == 1:
        assert counts.sum() == 0
    else:
        assert set(counts.tolist()) <= {1, 2}


@given(odd_d, st.data())
def test_x_syndrome_matches_parity(d, data):
    p = build_patch(d)
    supp = data.draw(st.sets(st.integers(0, p.n - 1)))
    s = p.x_syndrome(supp)
    v = np.zeros(p.n, dtype=int)
    v[list(supp)] = 1
    assert np.array_equal(s, 1 - 2 * (p.x_check_matrix @ v % 2))


@pytest.mark.parametrize("d", [1, 3, 5])
def test_network_links_and_corners(d):
    net = build_majorana_network(build_patch(d))
    assert net.majorana_count == 4 * d * d
    assert len(net.link_ops) == 2 * d * d - 2
    used = [k for e in net.link_ops for k in e] + list(net.logical_c4)
    assert sorted(used) == list(range(4 * d * d))


@pytest.mark.parametrize("d", [3, 5])
def test_face_products_equal_stabilizers(d):
    net = build_majorana_network(build_patch(d))
    for fl, target in zip(net.face_links, net.face_targets):
        assert face_link_product(net, fl).sign_against(target) == 1


def test_logical_pairs_frozen():
    net = build_majorana_network(build_patch(3))
    assert net.logical_c4 == (0, 11, 25, 34)
    assert net.logical_pairs == {"+": ((25, 0), (11, 34)), "Y": ((25, 11), (34, 0))}
    one = build_majorana_network(build_patch(1))
    assert one.logical_pairs == {"+": ((0, 1), (2, 3)), "Y": ((2, 0), (1, 3))}


@pytest.mark.parametrize("d", [1, 3, 5])
def test_pauli_reps_multiply_correctly(d):
    net = build_majorana_network(build_patch(d))
    for reps in net.pauli_reps:
        x, z, y = (bilinear(*reps[k]) for k in ("X", "Z", "Y"))
        # Y = i X Z for Pauli matrices; the C4 reps must satisfy the same relation
        assert product([x, z]).indices == y.indices
        assert len({*reps["X"], *reps["Z"], *reps["SX"]}) == 4


def test_dump_json_roundtrip(tmp_path):
    out = tmp_path / "lat.json"
    text = dump_json(3, out)
    data = json.loads(out.read_text())
    assert data == json.loads(text)
    assert data["majorana_count"] == 36
    assert len(data["link_ops"]) == 16
