import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherent_surface.majorana import IDENTITY, Monomial, bilinear, c4_stabilizer, gf2_solve, product
from coherent_surface.oracle import majorana_operators

N_MODES = 3
CS = majorana_operators(N_MODES)


def dense(m: Monomial) -> np.ndarray:
    out = (1j) ** m.phase * np.eye(2**N_MODES)
    for k in m.indices:
        out = out @ CS[k]
    return out


monomials = st.builds(
    lambda ph, idx: Monomial(ph, tuple(sorted(idx))),
    st.integers(0, 3),
    st.sets(st.integers(0, 2 * N_MODES - 1)),
)


def test_majorana_operators_anticommute():
    for a in range(2 * N_MODES):
        for b in range(2 * N_MODES):
            acomm = CS[a] @ CS[b] + CS[b] @ CS[a]
            assert np.allclose(acomm, 2 * np.eye(2**N_MODES) * (a == b))


@given(monomials, monomials)
def test_product_matches_dense(a, b):
    assert np.allclose(dense(a * b), dense(a) @ dense(b))


@given(monomials, monomials, monomials)
def test_product_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(st.integers(0, 5), st.integers(0, 5))
def test_bilinear_hermitian_and_square_one(p, q):
    if p == q:
        with pytest.raises(ValueError):
            bilinear(p, q)
        return
    m = dense(bilinear(p, q))
    assert np.allclose(m, m.conj().T)
    assert np.allclose(m @ m, np.eye(len(m)))
    assert bilinear(q, p) == -bilinear(p, q)


def test_c4_stabilizer_is_hermitian_involution():
    m = dense(c4_stabilizer(0, 1, 2, 3))
    assert np.allclose(m, m.conj().T)
    assert np.allclose(m @ m, np.eye(len(m)))


def test_sign_against():
    a = bilinear(0, 1)
    assert a.sign_against(a) == 1
    assert a.sign_against(-a) == -1
    with pytest.raises(ValueError):
        a.sign_against(Monomial(0, (0, 1)))
    with pytest.raises(ValueError):
        a.sign_against(bilinear(0, 2))


def test_product_empty_is_identity():
    assert product([]) == IDENTITY


@given(st.lists(st.integers(0, 255), min_size=1, max_size=8), st.integers(0, 255))
def test_gf2_solve(cols, target):
    sol = gf2_solve(cols, target, len(cols))
    if sol is None:
        # brute force confirms there is no solution
        for x in range(1 << len(cols)):
            acc = 0
            for j, c in enumerate(cols):
                if x >> j & 1:
                    acc ^= c
            assert acc != target
    else:
        acc = 0
        for j, c in enumerate(cols):
            if sol >> j & 1:
                acc ^= c
        assert acc == target
