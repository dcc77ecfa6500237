"""Input state and Unruh channel outputs for scalar (bosonic) and Dirac fields.

Basis conventions: two-qubit kets are ordered |00>, |01>, |10>, |11> with
Alice's qubit first. The bosonic output lives on Alice's qubit times a
truncated Rindler Fock space, index ``a * (n_max + 2) + m``.

The phase ``phi`` enters only through ``exp(i phi)`` and is accepted as any
real number; ``theta`` is restricted to ``[0, pi/2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import DensityOperator, partial_trace
from .qfi import QfiBreakdown, qfi_support

SCALAR = "scalar"
DIRAC = "dirac"
FIELDS = (SCALAR, DIRAC)
DIRAC_R_MAX = math.pi / 4
TAIL_TOL = 1e-12
MAX_BLOCKS = 5_000_000
DENSE_LIMIT = 512
PARAMS = ("theta", "phi")


class ChannelError(ValueError):
    """Invalid channel or input parameters."""


class InfiniteAccelerationError(ChannelError):
    """The frequency-to-acceleration ratio is zero, so r is unbounded."""


class TruncationError(ChannelError):
    def __init__(self, n_max: int, tail: float, required: int | None, tol: float):
        self.n_max = n_max
        self.tail = tail
        self.required = required
        hint = f"; n_max >= {required} is needed" if required is not None else ""
        super().__init__(
            f"truncation at n_max={n_max} leaves tail mass {tail:.3e} > {tol:.0e}{hint}"
        )


class DegenerateParameterError(ChannelError):
    """The closed-form eigensystem is singular at this point."""


def check_theta(theta: float) -> None:
    if not (0.0 <= theta <= math.pi / 2):
        raise ChannelError(f"theta must lie in [0, pi/2], got {theta!r}")


def check_phi(phi: float) -> None:
    if not math.isfinite(phi):
        raise ChannelError(f"phi must be finite, got {phi!r}")


def check_r(field: str, r: float) -> None:
    if field not in FIELDS:
        raise ChannelError(f"field must be one of {FIELDS}, got {field!r}")
    if not (math.isfinite(r) and r >= 0.0):
        raise ChannelError(f"r must be a finite nonnegative number, got {r!r}")
    if field == DIRAC and not r < DIRAC_R_MAX:
        raise ChannelError(f"Dirac r must lie in [0, pi/4), got {r!r}")


def check_param(param: str) -> None:
    if param not in PARAMS:
        raise ChannelError(f"parameter must be one of {PARAMS}, got {param!r}")


@dataclass(frozen=True)
class InputParams:
    theta: float
    phi: float

    def __post_init__(self):
        check_theta(self.theta)
        if not (0.0 <= self.phi < 2 * math.pi):
            raise ChannelError(f"phi must lie in [0, 2pi), got {self.phi!r}")


@dataclass(frozen=True)
class ChannelParams:
    field: str
    r: float
    n_max: int | None = None

    def __post_init__(self):
        check_r(self.field, self.r)
        if self.n_max is not None and self.n_max < 0:
            raise ChannelError(f"n_max must be nonnegative, got {self.n_max}")


def initial_state(theta: float, phi: float) -> np.ndarray:
    """cos(theta)|00> + exp(i phi) sin(theta)|11>."""
    check_theta(theta)
    check_phi(phi)
    return np.array([math.cos(theta), 0.0, 0.0, np.exp(1j * phi) * math.sin(theta)])


def r_from_acceleration(field: str, x: float) -> float:
    """Acceleration parameter r from the ratio x = frequency * c / a.

    Scalar: cosh r = (1 - exp(-2 pi x))^(-1/2), i.e. tanh r = exp(-pi x).
    Dirac: cos r = (1 + exp(-2 pi x))^(-1/2), i.e. tan r = exp(-pi x).
    """
    if field not in FIELDS:
        raise ChannelError(f"field must be one of {FIELDS}, got {field!r}")
    if math.isnan(x) or x < 0:
        raise ChannelError(f"frequency/acceleration ratio must be >= 0, got {x!r}")
    if x == 0:
        raise InfiniteAccelerationError("x = 0 corresponds to infinite acceleration")
    if field == SCALAR:
        return math.atanh(math.exp(-math.pi * x))
    return math.atan(math.exp(-math.pi * x))


# ---------------------------------------------------------------------------
# Bogoliubov expansions


def vacuum_n_max(r: float, tol: float = TAIL_TOL) -> int:
    """Smallest n_max whose scalar vacuum norm deficit tanh^(2(n_max+1)) r is <= tol."""
    t = math.tanh(r) ** 2
    if t == 0.0:
        return 0
    return max(0, math.ceil(math.log(tol) / math.log(t)) - 1)


def bogoliubov_vacuum(field: str, r: float, n_max: int | None = None) -> np.ndarray:
    """Rindler amplitudes of the Minkowski vacuum.

    Scalar: ``tanh^n r / cosh r`` on |n>_I |n>_II for n = 0..n_max.
    Dirac: ``(cos r, sin r)`` on |0>_I|0>_II and |1>_I|1>_II.
    """
    check_r(field, r)
    if field == DIRAC:
        return np.array([math.cos(r), math.sin(r)])
    if n_max is None:
        n_max = vacuum_n_max(r)
    n = np.arange(n_max + 1)
    return np.tanh(r) ** n / np.cosh(r)


def bogoliubov_excitation(field: str, r: float, n_max: int | None = None) -> np.ndarray:
    """Rindler amplitudes of the Minkowski one-particle state.

    Scalar: ``tanh^n r sqrt(n+1) / cosh^2 r`` on |n+1>_I |n>_II.
    Dirac: a single amplitude 1 on |1>_I |0>_II.
    """
    check_r(field, r)
    if field == DIRAC:
        return np.array([1.0])
    if n_max is None:
        n_max = scalar_n_max(math.pi / 2, r)
    n = np.arange(n_max + 1)
    return np.tanh(r) ** n * np.sqrt(n + 1.0) / np.cosh(r) ** 2


# ---------------------------------------------------------------------------
# scalar field


def scalar_tail_mass(theta: float, r: float, n_max: int) -> float:
    """Exact weight of the blocks n > n_max: t^M (1 + M sin^2(theta) / cosh^2 r), M = n_max + 1."""
    t = math.tanh(r) ** 2
    if t == 0.0:
        return 0.0
    m = n_max + 1
    return t**m * (1.0 + m * math.sin(theta) ** 2 / math.cosh(r) ** 2)


def scalar_n_max(theta: float, r: float, tail_tol: float = TAIL_TOL) -> int:
    """Smallest truncation whose discarded block weight is <= tail_tol."""
    t = math.tanh(r) ** 2
    if t == 0.0:
        return 0
    a = math.sin(theta) ** 2 / math.cosh(r) ** 2
    log_t = math.log(t)
    log_tol = math.log(tail_tol)

    def ok(m: int) -> bool:
        return m * log_t + math.log1p(a * m) <= log_tol

    hi = max(1, math.ceil(log_tol / log_t))
    while not ok(hi):
        hi *= 2
        if hi > 4 * MAX_BLOCKS:
            break
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return hi - 1


@dataclass(frozen=True, eq=False)
class ScalarBlockState:
    """Bosonic channel output as a direct sum of weighted pure qubit blocks.

    Block n lives on {|0, n>, |1, n+1>} with weight ``weights[n]`` and unit
    vector ``vectors[n]``. Derivative arrays are analytic.
    """

    theta: float
    phi: float
    r: float
    n_max: int
    weights: np.ndarray
    thetas: np.ndarray
    vectors: np.ndarray
    dweights_dtheta: np.ndarray
    dvectors_dtheta: np.ndarray
    dvectors_dphi: np.ndarray
    tail_mass: float

    @property
    def fock_dim(self) -> int:
        return self.n_max + 2

    @property
    def dim(self) -> int:
        return 2 * self.fock_dim

    def derivatives(self, param: str) -> tuple[np.ndarray, np.ndarray]:
        check_param(param)
        if param == "theta":
            return self.dweights_dtheta, self.dvectors_dtheta
        return np.zeros_like(self.weights), self.dvectors_dphi

    def breakdown(self, param: str) -> QfiBreakdown:
        """Classical, pure-average and mixing terms summed over blocks.

        Blocks occupy disjoint basis pairs, so eigenvectors of different
        blocks never overlap and the mixing term is identically zero.
        """
        dw, dv = self.derivatives(param)
        keep = self.weights > 0
        w, v, dw, dv = self.weights[keep], self.vectors[keep], dw[keep], dv[keep]
        classical = float(np.sum(dw**2 / w))
        overlap = np.sum(np.conj(v) * dv, axis=1)
        pure = 4.0 * (np.sum(np.abs(dv) ** 2, axis=1) - np.abs(overlap) ** 2)
        quantum_avg = float(np.sum(w * pure))
        return QfiBreakdown(classical + quantum_avg, classical, quantum_avg, 0.0)


def scalar_channel(
    theta: float,
    phi: float,
    r: float,
    n_max: int | None = None,
    tail_tol: float = TAIL_TOL,
) -> ScalarBlockState:
    """Block decomposition of the bosonic channel acting on the input state."""
    check_theta(theta)
    check_phi(phi)
    check_r(SCALAR, r)
    if n_max is None:
        n_max = scalar_n_max(theta, r, tail_tol)
        if n_max + 1 > MAX_BLOCKS:
            raise TruncationError(MAX_BLOCKS - 1, scalar_tail_mass(theta, r, MAX_BLOCKS - 1),
                                  n_max, tail_tol)
    tail = scalar_tail_mass(theta, r, n_max)
    if tail > tail_tol:
        raise TruncationError(n_max, tail, scalar_n_max(theta, r, tail_tol), tail_tol)

    ch = math.cosh(r)
    ct, st = math.cos(theta), math.sin(theta)
    n = np.arange(n_max + 1, dtype=float)
    thermal = np.tanh(r) ** (2 * n) / ch**2
    big_theta = ct**2 + (n + 1) * st**2 / ch**2
    weights = thermal * big_theta
    d_big_theta = math.sin(2 * theta) * ((n + 1) / ch**2 - 1.0)
    root = np.sqrt(big_theta)
    e = np.exp(1j * phi)
    s = np.sqrt(n + 1) / ch

    vectors = np.empty((n.size, 2), dtype=complex)
    vectors[:, 0] = ct / root
    vectors[:, 1] = e * s * st / root
    # d/dtheta sqrt(Theta_n) = dTheta_n / (2 sqrt(Theta_n))
    d_root = d_big_theta / (2.0 * root)
    dv_theta = np.empty_like(vectors)
    dv_theta[:, 0] = (-st * root - ct * d_root) / big_theta
    dv_theta[:, 1] = e * s * (ct * root - st * d_root) / big_theta
    dv_phi = np.zeros_like(vectors)
    dv_phi[:, 1] = 1j * vectors[:, 1]

    arrays = [thermal, weights, vectors, d_big_theta, dv_theta, dv_phi, big_theta]
    for a in arrays:
        a.setflags(write=False)
    return ScalarBlockState(
        theta=theta,
        phi=phi,
        r=r,
        n_max=n_max,
        weights=weights,
        thetas=big_theta,
        vectors=vectors,
        dweights_dtheta=thermal * d_big_theta,
        dvectors_dtheta=dv_theta,
        dvectors_dphi=dv_phi,
        tail_mass=tail,
    )


def _embed_blocks(blocks: np.ndarray, fock_dim: int, sparse: bool):
    """Place 2x2 blocks on index pairs (n, fock_dim + n + 1)."""
    k = blocks.shape[0]
    dim = 2 * fock_dim
    i0 = np.arange(k)
    i1 = fock_dim + i0 + 1
    rows = np.concatenate([i0, i0, i1, i1])
    cols = np.concatenate([i0, i1, i0, i1])
    vals = np.concatenate([blocks[:, 0, 0], blocks[:, 0, 1], blocks[:, 1, 0], blocks[:, 1, 1]])
    if sparse:
        return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
    out = np.zeros((dim, dim), dtype=complex)
    out[rows, cols] = vals
    return out


def _use_sparse(s: ScalarBlockState, sparse: bool | None) -> bool:
    return s.dim > DENSE_LIMIT if sparse is None else sparse


def scalar_state_as_matrix(s: ScalarBlockState, sparse: bool | None = None) -> DensityOperator:
    """Embed the block state on Alice's qubit times the truncated Fock space.

    Dense up to ``DENSE_LIMIT`` rows unless ``sparse`` says otherwise.
    """
    v = s.vectors
    blocks = s.weights[:, None, None] * v[:, :, None] * np.conj(v[:, None, :])
    m = _embed_blocks(blocks, s.fock_dim, _use_sparse(s, sparse))
    # trace is 1 - tail, which the density-operator trace tolerance absorbs
    return DensityOperator(m)


def scalar_state_derivative(s: ScalarBlockState, param: str, sparse: bool | None = None):
    """Analytic d rho / d param on the same basis as :func:`scalar_state_as_matrix`."""
    dw, dv = s.derivatives(param)
    w, v = s.weights, s.vectors
    outer = v[:, :, None] * np.conj(v[:, None, :])
    cross = dv[:, :, None] * np.conj(v[:, None, :])
    blocks = dw[:, None, None] * outer + w[:, None, None] * (cross + np.conj(np.swapaxes(cross, 1, 2)))
    return _embed_blocks(blocks, s.fock_dim, _use_sparse(s, sparse))


def scalar_channel_matrix(theta: float, phi: float, r: float, n_max: int) -> DensityOperator:
    """Bosonic channel output built directly from the Bogoliubov amplitudes.

    The input pure state is mapped to Alice x Rindler I x Rindler II and
    region II is traced out. Independent of the block formulas; dense only.
    """
    check_theta(theta)
    check_phi(phi)
    vac = bogoliubov_vacuum(SCALAR, r, n_max)
    exc = bogoliubov_excitation(SCALAR, r, n_max)
    fock = n_max + 2
    psi = np.zeros((2, fock, n_max + 1), dtype=complex)
    k = np.arange(n_max + 1)
    psi[0, k, k] = math.cos(theta) * vac
    psi[1, k + 1, k] = np.exp(1j * phi) * math.sin(theta) * exc
    rho = np.einsum("aik,bjk->aibj", psi, np.conj(psi)).reshape(2 * fock, 2 * fock)
    return DensityOperator(rho)


# ---------------------------------------------------------------------------
# Dirac field


def dirac_channel(theta: float, phi: float, r: float) -> DensityOperator:
    """Fermionic channel output on Alice x Rindler I.

    Maps the Minkowski modes to Rindler I x II and traces region II out.
    """
    check_theta(theta)
    check_phi(phi)
    check_r(DIRAC, r)
    vac = bogoliubov_vacuum(DIRAC, r)
    # |psi> on A x I x II, index a*4 + i*2 + ii
    psi = np.zeros(8, dtype=complex)
    psi[0b000] = math.cos(theta) * vac[0]
    psi[0b011] = math.cos(theta) * vac[1]
    psi[0b110] = np.exp(1j * phi) * math.sin(theta)
    full = np.outer(psi, np.conj(psi))
    return partial_trace(full, (4, 2), keep="A")


def dirac_channel_derivative(theta: float, phi: float, r: float, param: str) -> np.ndarray:
    """Analytic derivative of :func:`dirac_channel` in ``theta`` or ``phi``."""
    check_param(param)
    check_r(DIRAC, r)
    cr2, sr2 = math.cos(r) ** 2, math.sin(r) ** 2
    d = np.zeros((4, 4), dtype=complex)
    if param == "theta":
        s2 = math.sin(2 * theta)
        d[0, 0] = -cr2 * s2
        d[1, 1] = -sr2 * s2
        d[3, 3] = s2
        d[0, 3] = math.cos(r) * math.cos(2 * theta) * np.exp(-1j * phi)
    else:
        d[0, 3] = -0.5j * math.cos(r) * math.sin(2 * theta) * np.exp(-1j * phi)
    d[3, 0] = np.conj(d[0, 3])
    return d


@dataclass(frozen=True, eq=False)
class DiracEigensystem:
    """Nonzero eigenpairs of the Dirac output, with analytic derivatives."""

    lam1: float
    lam2: float
    phi1: np.ndarray
    phi2: np.ndarray
    dlam1_dtheta: float
    dphi1_dtheta: np.ndarray
    dphi1_dphi: np.ndarray

    def breakdown(self, param: str) -> QfiBreakdown:
        check_param(param)
        dl = self.dlam1_dtheta if param == "theta" else 0.0
        dphi1 = self.dphi1_dtheta if param == "theta" else self.dphi1_dphi
        p = np.array([self.lam1, self.lam2])
        dp = np.array([dl, -dl])
        psis = np.column_stack([self.phi1, self.phi2])
        dpsis = np.column_stack([dphi1, np.zeros(4)])
        keep = p > 0
        return qfi_support(p[keep], psis[:, keep], dp[keep], dpsis[:, keep])


def dirac_eigensystem(theta: float, phi: float, r: float) -> DiracEigensystem:
    """Closed-form support eigensystem; undefined at theta = 0 and pi/2."""
    check_theta(theta)
    check_phi(phi)
    check_r(DIRAC, r)
    if theta <= 0.0 or theta >= math.pi / 2:
        raise DegenerateParameterError(
            "cot(theta) is singular at theta in {0, pi/2}; use the matrix route"
        )
    cr, sr = math.cos(r), math.sin(r)
    ct = math.cos(theta) / math.sin(theta)
    g = cr * ct
    norm = 1.0 / math.sqrt(1.0 + g * g)
    e = np.exp(-1j * phi)
    phi1 = norm * np.array([e * g, 0.0, 0.0, 1.0])
    phi2 = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)

    dg = -cr / math.sin(theta) ** 2
    dnorm = -g * dg * norm**3
    dphi1_dtheta = np.array([e * (dnorm * g + norm * dg), 0.0, 0.0, dnorm])
    dphi1_dphi = np.array([-1j * e * norm * g, 0.0, 0.0, 0.0])

    lam2 = sr**2 * math.cos(theta) ** 2
    return DiracEigensystem(
        lam1=1.0 - lam2,
        lam2=lam2,
        phi1=phi1,
        phi2=phi2,
        dlam1_dtheta=sr**2 * math.sin(2 * theta),
        dphi1_dtheta=dphi1_dtheta,
        dphi1_dphi=dphi1_dphi,
    )


def reduced_state(rho, keep: str) -> DensityOperator:
    """Reduced state of Alice (``"A"``) or Rob (``"R"``)."""
    m = rho.dense() if isinstance(rho, DensityOperator) else np.asarray(rho)
    d = m.shape[0]
    return partial_trace(m, (2, d // 2), keep="B" if keep.upper() == "R" else keep)


def reduced_derivative(drho, keep: str) -> np.ndarray:
    """Partial trace of a state derivative, matching :func:`reduced_state`."""
    m = np.asarray(drho)
    d = m.shape[0]
    return partial_trace(m, (2, d // 2), keep="B" if keep.upper() == "R" else keep, as_state=False)


# ---------------------------------------------------------------------------
# uniform access for sweeps, the CLI and the estimator


def channel_pair(
    field: str,
    theta: float,
    phi: float,
    r: float,
    param: str,
    n_max: int | None = None,
):
    """(rho, d rho / d param) for either field, using analytic derivatives."""
    check_param(param)
    if field == DIRAC:
        return dirac_channel(theta, phi, r), dirac_channel_derivative(theta, phi, r, param)
    check_r(field, r)
    s = scalar_channel(theta, phi, r, n_max=n_max)
    return scalar_state_as_matrix(s), scalar_state_derivative(s, param)
