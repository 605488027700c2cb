import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiacont.errors import WindowCapError
from adiacont.lattice import Lattice
from adiacont.operators import (
    DenseOperator,
    LocalOperator,
    PAULI_MATRICES,
    commutator,
    dagger,
    dense_support,
    embed,
    embed_dense,
    multiply,
    op_norm,
    operator_from_text,
    operator_to_text,
)

from .oracles import SX, SY, SZ


def test_embed_sigma_z_single_site():
    d = embed(LocalOperator.pauli((0,), 3), ((0,),))
    assert np.allclose(d.matrix, np.diag([1.0, -1.0]))


def test_embed_identity():
    d = embed(LocalOperator.identity(), ((0,), (1,), (2,)))
    assert np.allclose(d.matrix, np.eye(8))


def test_embed_matches_kron_oracle():
    op = LocalOperator.pauli((0,), 1) * LocalOperator.pauli((1,), 2) * LocalOperator.pauli((2,), 3)
    d = embed(op, ((0,), (1,), (2,)))
    want = np.kron(np.kron(SX, SY), SZ)
    assert np.allclose(d.matrix, want)


def test_embed_nesting_homomorphism():
    op = LocalOperator.pauli((1,), 1, 0.5) + LocalOperator.pauli((2,), 3, 2.0)
    small = embed(op, ((1,), (2,)))
    grown = embed_dense(small, ((0,), (1,), (2,)))
    direct = embed(op, ((0,), (1,), (2,)))
    assert np.allclose(grown.matrix, direct.matrix)


def test_embed_dense_permutation_correctness():
    # growing into a window whose extra site sorts FIRST exercises the leg permutation
    op = LocalOperator.pauli((1,), 2, 1.0) * LocalOperator.pauli((2,), 1, 1.0)
    small = embed(op, ((1,), (2,)))
    grown = embed_dense(small, ((0,), (1,), (2,)))
    want = np.kron(np.kron(np.eye(2), SY), SX)
    assert np.allclose(grown.matrix, want)


def test_embed_requires_support_in_window():
    with pytest.raises(ValueError):
        embed(LocalOperator.pauli((3,), 1), ((0,),))


def test_window_cap():
    lat = Lattice(2, 4)
    with pytest.raises(WindowCapError):
        embed(LocalOperator.identity(), lat.sites())  # 16 sites > 14


def test_op_norm_examples():
    pauli_x = embed(LocalOperator.pauli((0,), 1), ((0,),))
    assert op_norm(pauli_x) == pytest.approx(1.0, abs=1e-12)
    pauli_z = embed(LocalOperator.pauli((0,), 3), ((0,),))
    assert op_norm(commutator(pauli_x, pauli_z)) == pytest.approx(2.0, abs=1e-12)
    zz = LocalOperator.pauli((0,), 3) * LocalOperator.pauli((1,), 3)
    x1 = LocalOperator.pauli((0,), 1)
    d = embed(zz + x1, ((0,), (1,)))
    assert op_norm(d) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_commutator_pauli_algebra():
    w = ((0,),)
    x = embed(LocalOperator.pauli((0,), 1), w)
    y = embed(LocalOperator.pauli((0,), 2), w)
    assert np.allclose(commutator(x, x).matrix, 0.0)
    assert np.allclose(commutator(x, y).matrix, 2.0j * np.diag([1.0, -1.0]))


def test_dagger_involution(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    d = DenseOperator(((0,), (1,)), m)
    assert np.allclose(dagger(dagger(d)).matrix, d.matrix)


def test_multiply_auto_embed_union_window():
    a = embed(LocalOperator.pauli((0,), 3), ((0,),))
    b = embed(LocalOperator.pauli((1,), 3), ((1,),))
    prod = multiply(a, b)
    want = embed(LocalOperator.pauli((0,), 3) * LocalOperator.pauli((1,), 3), ((0,), (1,)))
    assert prod.window == ((0,), (1,))
    assert np.allclose(prod.matrix, want.matrix)
    with pytest.raises(ValueError):
        multiply(a, b, auto_embed=False)


def test_pauli_translate_norm_and_support():
    lat = Lattice(1, 6)
    op = LocalOperator.pauli((0,), 1, 0.7) * LocalOperator.pauli((1,), 3, 1.0)
    moved = op.translate(lat, (4,))
    assert moved.support == lat.translate(op.support, (4,))
    n0 = op_norm(embed(op, op.support))
    n1 = op_norm(embed(moved, moved.support))
    assert n1 == pytest.approx(n0, rel=1e-12)
    assert op.translate(lat, (0,)).terms == op.terms


def test_pauli_product_same_site_squares_to_identity():
    op = LocalOperator.pauli((0,), 1) * LocalOperator.pauli((0,), 1)
    assert op.terms == {(): 1.0 + 0.0j}
    assert op.support == ()


def test_hermitian_flag():
    herm = LocalOperator.pauli((0,), 1, 2.5) + LocalOperator.pauli((1,), 3, -1.0)
    assert herm.is_hermitian
    not_herm = LocalOperator.pauli((0,), 1, 1.0j)
    assert not not_herm.is_hermitian


def test_support_cancellation():
    op = LocalOperator.pauli((0,), 1) + LocalOperator.pauli((0,), 1, -1.0)
    assert op.support == ()
    assert not op.terms


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_norm_submultiplicative_and_commutator_bound(data):
    dim_sites = data.draw(st.integers(1, 3))
    window = tuple((k,) for k in range(dim_sites))
    dim = 2**dim_sites
    seed = data.draw(st.integers(0, 2**32 - 1))
    r = np.random.default_rng(seed)
    a = DenseOperator(window, r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim)))
    b = DenseOperator(window, r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim)))
    na, nb = op_norm(a), op_norm(b)
    assert op_norm(multiply(a, b)) <= na * nb * (1 + 1e-10)
    assert op_norm(commutator(a, b)) <= 2 * na * nb * (1 + 1e-10)


def test_embed_respects_products():
    w = ((0,), (1,), (2,))
    a = LocalOperator.pauli((0,), 1) * LocalOperator.pauli((1,), 2)
    b = LocalOperator.pauli((1,), 3, 0.5)
    da, db = embed(a, w), embed(b, w)
    dab = embed(a * b, w)
    assert np.allclose(multiply(da, db).matrix, dab.matrix)


def test_op_norm_hermitian_cross_check(rng):
    # singular-value path agrees with |eigenvalue| path on 2^6-dim Hermitian
    m = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
    h = (m + m.conj().T) / 2
    d = DenseOperator(tuple((k,) for k in range(6)), h)
    sv = op_norm(d)
    ev = float(np.abs(np.linalg.eigvalsh(h)).max())
    assert sv == pytest.approx(ev, rel=1e-10)


def test_pauli_trace_orthogonality_three_sites():
    window = ((0,), (1,), (2,))
    dim = 8
    mats = {}
    for a0 in range(4):
        for a1 in range(4):
            for a2 in range(4):
                op = LocalOperator.identity()
                for site, ax in zip(window, (a0, a1, a2)):
                    op = op * LocalOperator.pauli(site, ax)
                mats[(a0, a1, a2)] = embed(op, window).matrix
    keys = list(mats)
    stack = np.array([mats[k] for k in keys])
    gram = np.einsum("aij,bij->ab", stack.conj(), stack) / dim
    assert np.allclose(gram, np.eye(len(keys)), atol=1e-12)


def test_dense_support_detects_identity_legs():
    w = ((0,), (1,), (2,))
    op = LocalOperator.pauli((1,), 2, 0.3)
    d = embed(op, w)
    assert dense_support(d) == ((1,),)
    ident = embed(LocalOperator.identity(), w)
    assert dense_support(ident) == ()


def test_serialization_roundtrip_1d_and_2d():
    op = (
        LocalOperator.pauli((0,), 1, 0.25)
        + LocalOperator.pauli((3,), 3, -1.5)
        + LocalOperator.pauli((1,), 2, 2.0) * LocalOperator.pauli((2,), 1, 1.0)
    )
    back = operator_from_text(operator_to_text(op))
    assert back.terms == op.terms

    op2d = LocalOperator.pauli((0, 1), 1, 1.0) * LocalOperator.pauli((1, 1), 1, 0.2)
    back2d = operator_from_text(operator_to_text(op2d))
    assert back2d.terms == op2d.terms


def test_pauli_matrices_table():
    assert np.allclose(PAULI_MATRICES[1], SX)
    assert np.allclose(PAULI_MATRICES[2], SY)
    assert np.allclose(PAULI_MATRICES[3], SZ)
