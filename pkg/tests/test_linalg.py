import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from unruhqfi.linalg import (
    BlockLayout,
    ConvergenceError,
    DensityOperator,
    DimensionError,
    LinalgError,
    NotHermitianError,
    NotPositiveError,
    eig_hermitian,
    jacobi_stack,
    partial_trace,
    sqrtm_psd,
    tensor,
)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_state(rng, n, rank=None):
    rank = rank or n
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 12))
def test_eig_matches_numpy(seed, n):
    a = random_hermitian(np.random.default_rng(seed), n)
    dec = eig_hermitian(a)
    assert np.allclose(dec.eigenvalues, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-12)
    assert np.allclose(dec.reconstruct(), a, atol=1e-12)
    v = dec.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_eig_degenerate_and_diagonal():
    dec = eig_hermitian(np.diag([1.0, 1.0, 0.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [2.0, 1.0, 1.0, 0.0])
    a = np.array([[1, 1j, 0], [-1j, 1, 0], [0, 0, 3]])
    dec = eig_hermitian(a)
    assert np.allclose(dec.eigenvalues, [3.0, 2.0, 0.0], atol=1e-14)


def test_eig_blockwise_on_sparse_block_diagonal(rng):
    blocks = [random_hermitian(rng, 2) for _ in range(50)] + [random_hermitian(rng, 3)]
    a = sp.block_diag(blocks, format="csr")
    dec = eig_hermitian(a)
    expected = np.sort(np.concatenate([np.linalg.eigvalsh(b) for b in blocks]))[::-1]
    assert np.allclose(dec.eigenvalues, expected, atol=1e-12)
    assert np.allclose(dec.reconstruct(), a.toarray(), atol=1e-12)


def test_block_layout_groups():
    a = np.zeros((5, 5))
    a[0, 3] = a[3, 0] = 1.0
    a[1, 1] = 2.0
    a[2, 4] = a[4, 2] = 1.0
    lay = BlockLayout.from_pattern(a)
    assert set(lay.groups) == {1, 2}
    assert lay.groups[2].shape == (2, 2)
    stack = lay.gather(a, 2)
    assert stack.shape == (2, 2, 2)


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DimensionError):
        eig_hermitian(np.zeros((2, 3)))


def test_sweep_limit_raises(rng):
    a = random_hermitian(rng, 8)
    with pytest.raises(ConvergenceError):
        jacobi_stack(a[None], max_sweeps=1)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 8))
def test_sqrtm_squares_back(seed, n):
    rho = random_state(np.random.default_rng(seed), n)
    s = sqrtm_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-12)
    assert np.allclose(s, s.conj().T, atol=1e-14)


def test_sqrtm_rejects_negative():
    with pytest.raises(NotPositiveError):
        sqrtm_psd(np.diag([1.0, -0.1]))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, da=st.integers(1, 4), db=st.integers(1, 4))
def test_partial_trace_of_product(seed, da, db):
    rng = np.random.default_rng(seed)
    a, b = random_state(rng, da), random_state(rng, db)
    ab = tensor(a, b)
    assert np.allclose(partial_trace(ab, (da, db), "A").dense(), a, atol=1e-13)
    assert np.allclose(partial_trace(ab, (da, db), "B").dense(), b, atol=1e-13)


def test_partial_trace_bell_state():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    red = partial_trace(np.outer(psi, psi.conj()), (2, 2), "A")
    assert np.allclose(red.dense(), np.eye(2) / 2)
    with pytest.raises(LinalgError):
        partial_trace(np.outer(psi, psi), (2, 2), "C")
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4) / 4, (2, 3), "A")


def test_partial_trace_of_traceless_operator():
    d = np.diag([1.0, -1.0, 0.0, 0.0])
    out = partial_trace(d, (2, 2), "B", as_state=False)
    assert isinstance(out, np.ndarray)
    assert np.allclose(out, np.diag([1.0, -1.0]))


def test_density_operator_validation(rng):
    rho = DensityOperator(random_state(rng, 3))
    assert abs(rho.trace() - 1) < 1e-14
    assert not rho.dense().flags.writeable
    with pytest.raises(LinalgError):
        DensityOperator(np.eye(2))
    with pytest.raises(NotPositiveError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(NotHermitianError):
        DensityOperator(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_density_operator_sparse():
    rho = DensityOperator(sp.diags([0.5, 0.25, 0.25]).tocsr())
    assert rho.is_sparse and rho.dim == 3
    assert np.allclose(rho.spectrum().eigenvalues, [0.5, 0.25, 0.25])
