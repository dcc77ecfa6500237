import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from unruhqfi.linalg import DensityOperator
from unruhqfi.qfi import (
    ParametrizedState,
    SupportError,
    bures_distance,
    qfi_from_bures,
    qfi_from_sld,
    qfi_pure,
    qfi_spectral,
    qfi_support,
    root_fidelity,
    sld,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_state(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def unitary_family(rho0, h):
    """rho(x) = exp(-i x H) rho0 exp(i x H)."""

    def rho_at(x):
        u = sla.expm(-1j * x * h)
        return u @ rho0 @ u.conj().T

    def drho_at(x):
        r = rho_at(x)
        return -1j * (h @ r - r @ h)

    return ParametrizedState(rho_at, drho_at)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_spectral_equals_sld_trace(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, n)
    d = random_hermitian(rng, n)
    d -= np.trace(d) / n * np.eye(n)
    L = sld(rho, d)
    assert np.allclose(0.5 * (rho @ L + L @ rho), d, atol=1e-10)
    assert qfi_from_sld(rho, L) == pytest.approx(qfi_spectral(rho, d), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(2, 5))
def test_support_formula_matches_spectral(seed, n):
    # eigenpair derivatives from first-order perturbation theory
    rng = np.random.default_rng(seed)
    rho = random_state(rng, n)
    d = random_hermitian(rng, n)
    d -= np.trace(d) / n * np.eye(n)
    p, v = np.linalg.eigh(rho)
    dt = v.conj().T @ d @ v
    dp = np.real(np.diag(dt))
    gap = p[None, :] - p[:, None]
    np.fill_diagonal(gap, 1.0)
    coeff = dt / gap
    np.fill_diagonal(coeff, 0.0)
    dv = v @ coeff
    bd = qfi_support(p, v, dp, dv)
    assert bd.total == pytest.approx(qfi_spectral(rho, d), rel=1e-9)
    assert bd.mixing <= 0.0
    assert bd.classical >= 0.0


def test_pure_state_routes_agree(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    h = random_hermitian(rng, 4)
    dpsi = -1j * h @ psi
    rho = np.outer(psi, psi.conj())
    d = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
    expected = 4 * (np.vdot(psi, h @ h @ psi).real - np.vdot(psi, h @ psi).real ** 2)
    assert qfi_pure(psi, dpsi) == pytest.approx(expected, rel=1e-12)
    assert qfi_spectral(rho, d) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 4)
    d = random_hermitian(rng, 4)
    d -= np.trace(d) / 4 * np.eye(4)
    u = sla.expm(-1j * random_hermitian(rng, 4))
    a = qfi_spectral(rho, d)
    b = qfi_spectral(u @ rho @ u.conj().T, u @ d @ u.conj().T)
    assert a == pytest.approx(b, rel=1e-10)
    assert a >= 0.0


def test_sparse_matches_dense(rng):
    import scipy.sparse as sp

    blocks = [random_state(rng, 2) / 3 for _ in range(3)]
    dblocks = [random_hermitian(rng, 2) * 0.01 for _ in range(3)]
    rho = sp.block_diag(blocks, format="csr")
    d = sp.block_diag(dblocks, format="csr")
    assert qfi_spectral(rho, d) == pytest.approx(qfi_spectral(rho.toarray(), d.toarray()), rel=1e-12)


def test_derivative_outside_support_raises():
    rho = np.diag([1.0, 0.0])
    d = np.diag([-1.0, 1.0])
    with pytest.raises(SupportError):
        qfi_spectral(rho, d)


def test_support_rejects_bad_input():
    with pytest.raises(ValueError):
        qfi_support([0.5, 0.5], np.ones((2, 2)), [0, 0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        qfi_support([0.7, 0.7], np.eye(2), [0, 0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        qfi_pure([1.0, 1.0], [0.0, 0.0])


def test_fidelity_pure_states(rng):
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    f = root_fidelity(np.outer(a, a.conj()), np.outer(b, b.conj()))
    assert f == pytest.approx(abs(np.vdot(a, b)), abs=1e-7)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(2, 5))
def test_fidelity_matches_scipy_sqrtm(seed, n):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(rng, n), random_state(rng, n)
    s = sla.sqrtm(rho)
    ref = np.trace(sla.sqrtm(s @ sigma @ s)).real
    assert root_fidelity(rho, sigma) == pytest.approx(ref, rel=1e-9)
    assert root_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= bures_distance(DensityOperator(rho), DensityOperator(sigma)) <= np.sqrt(2)


def test_fidelity_subnormalised_tail():
    rho = np.diag([0.6, 0.4 - 1e-12])
    assert root_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bures_route_unitary_family(rng, n):
    fam = unitary_family(random_state(rng, n), random_hermitian(rng, n))
    exact = qfi_spectral(fam.rho(0.3), fam.drho(0.3))
    est = qfi_from_bures(fam, 0.3)
    assert est.value == pytest.approx(exact, rel=1e-4)
    assert not est.rank_changed


def test_bures_flags_rank_change():
    fam = ParametrizedState(lambda x: np.diag([1.0 - max(x, 0.0), max(x, 0.0)]))
    assert qfi_from_bures(fam, 0.0, dlam=1e-4).rank_changed


def test_finite_difference_fallback(rng):
    fam = unitary_family(random_state(rng, 3), random_hermitian(rng, 3))
    numeric = ParametrizedState(fam.rho_at)
    assert np.allclose(numeric.drho(0.2), fam.drho(0.2), atol=1e-8)
