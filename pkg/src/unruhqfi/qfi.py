"""Quantum Fisher information engines.

Four independent routes to the same number:

* :func:`qfi_spectral` - eigendecomposition of the state, pairwise sum over
  eigenvectors (blockwise, so large block-diagonal states stay cheap);
* :func:`sld` - the symmetric logarithmic derivative, giving ``Tr(rho L^2)``;
* :func:`qfi_support` - classical + pure-state-average + mixing terms built
  from support eigenpairs and their parameter derivatives;
* :func:`qfi_from_bures` - second-order expansion of the Bures distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import (
    DEFAULT_CUTOFF,
    BlockLayout,
    DensityOperator,
    DimensionError,
    LinalgError,
    as_matrix,
    check_hermitian,
    eig_blocks,
    jacobi_stack,
    to_dense,
)

SUPPORT_TOL = 1e-8
ORTHO_TOL = 1e-10
FD_STEP = 1e-6


class SupportError(LinalgError):
    """The derivative has weight outside the support, so no SLD exists."""


@dataclass(frozen=True)
class QfiBreakdown:
    total: float
    classical: float
    quantum_avg: float
    mixing: float


@dataclass(frozen=True)
class ParametrizedState:
    """One-parameter family of states.

    ``drho_at`` may be omitted, in which case the derivative is a central
    finite difference with step ``h``.
    """

    rho_at: Callable[[float], object]
    drho_at: Callable[[float], object] | None = None
    h: float = FD_STEP

    def rho(self, lam: float):
        return as_matrix(self.rho_at(lam))

    def drho(self, lam: float):
        if self.drho_at is not None:
            return as_matrix(self.drho_at(lam))
        return central_difference(self.rho_at, lam, self.h)


def central_difference(f: Callable[[float], object], x: float, h: float = FD_STEP):
    plus = as_matrix(f(x + h))
    minus = as_matrix(f(x - h))
    return (plus - minus) / (2.0 * h)


def _check_pair(rho, drho):
    rho = as_matrix(rho)
    drho = as_matrix(drho)
    if rho.shape != drho.shape:
        raise DimensionError(f"rho {rho.shape} and drho {drho.shape} differ in shape")
    check_hermitian(drho)
    return rho, drho


def _rotated_blocks(rho, drho):
    """Yield (idx, p, V, drho in eigenbasis) per block size class."""
    for _, idx, p, v, (d,) in eig_blocks(rho, drho):
        vh = np.conj(np.swapaxes(v, 1, 2))
        yield idx, p, v, vh @ d @ v


def _support_mask(p: np.ndarray, dt: np.ndarray, eps: float) -> np.ndarray:
    denom = p[:, :, None] + p[:, None, :]
    mask = denom > eps
    if np.any(~mask):
        leak = float(np.max(np.abs(dt[~mask])))
        if leak > SUPPORT_TOL:
            raise SupportError(
                f"derivative has weight {leak:.3e} outside the support; "
                "the parameter moves the support and the SLD does not exist"
            )
    return mask


def qfi_spectral(rho, drho, eps: float = DEFAULT_CUTOFF) -> float:
    """QFI from the spectral decomposition of ``rho``.

    ``2 * sum |<m|drho|n>|^2 / (p_m + p_n)`` over pairs with
    ``p_m + p_n > eps``. Accepts dense or sparse matrices.
    """
    rho, drho = _check_pair(rho, drho)
    total = 0.0
    for _, p, _, dt in _rotated_blocks(rho, drho):
        denom = p[:, :, None] + p[:, None, :]
        mask = _support_mask(p, dt, eps)
        total += 2.0 * float(np.sum(np.abs(dt[mask]) ** 2 / denom[mask]))
    return total


def sld(rho, drho, eps: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Symmetric logarithmic derivative L with drho = (rho L + L rho) / 2.

    Built in the eigenbasis of ``rho``; matrix elements between directions
    with ``p_m + p_n <= eps`` are set to zero. Returned densely in the
    original basis.
    """
    rho, drho = _check_pair(rho, drho)
    n = rho.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for idx, p, v, dt in _rotated_blocks(rho, drho):
        denom = p[:, :, None] + p[:, None, :]
        mask = _support_mask(p, dt, eps)
        lt = np.where(mask, 2.0 * dt / np.where(mask, denom, 1.0), 0.0)
        block = v @ lt @ np.conj(np.swapaxes(v, 1, 2))
        out[idx[:, :, None], idx[:, None, :]] = block
    return out


def qfi_from_sld(rho, L: np.ndarray) -> float:
    """Tr(rho L^2)."""
    r = to_dense(rho)
    return float(np.real(np.trace(r @ L @ L)))


def qfi_pure(psi, dpsi, tol: float = 1e-10) -> float:
    """4 (<dpsi|dpsi> - |<psi|dpsi>|^2) for a normalised ket."""
    psi = np.asarray(psi, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise LinalgError(f"state is not normalised: ||psi|| = {norm:.15g}")
    overlap = np.vdot(psi, dpsi)
    return float(4.0 * (np.vdot(dpsi, dpsi).real - abs(overlap) ** 2))


def qfi_support(p, psis, dp, dpsis, tol: float = ORTHO_TOL) -> QfiBreakdown:
    """QFI from support eigenpairs ``(p_i, psi_i)`` and their derivatives.

    ``psis`` and ``dpsis`` hold one vector per column. The quantum term
    averages the pure-state QFI of each eigenvector with weight ``p_i``;
    the mixing term couples distinct eigenvectors and is never positive.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    psis = np.asarray(psis, dtype=complex)
    dpsis = np.asarray(dpsis, dtype=complex)
    if psis.ndim == 1:
        psis = psis[:, None]
        dpsis = dpsis[:, None]
    if np.any(p <= 0):
        raise LinalgError("support weights must be strictly positive")
    if p.sum() > 1.0 + 1e-10:
        raise LinalgError(f"support weights sum to {p.sum():.15g} > 1")
    gram = psis.conj().T @ psis
    defect = float(np.max(np.abs(gram - np.eye(p.size))))
    if defect > tol:
        raise LinalgError(f"support vectors are not orthonormal (defect {defect:.3e})")

    classical = float(np.sum(dp**2 / p))
    pure = np.array([qfi_pure(psis[:, i], dpsis[:, i]) for i in range(p.size)])
    quantum_avg = float(np.sum(p * pure))
    overlaps = np.abs(psis.conj().T @ dpsis) ** 2
    weight = 8.0 * np.outer(p, p) / (p[:, None] + p[None, :])
    np.fill_diagonal(weight, 0.0)
    mixing = -float(np.sum(weight * overlaps))
    return QfiBreakdown(classical + quantum_avg + mixing, classical, quantum_avg, mixing)


# ---------------------------------------------------------------------------
# Bures route


def _stack_sqrt(stack: np.ndarray, cutoff: float) -> np.ndarray:
    w, v = jacobi_stack(stack)
    if w.size and w.min() < -1e-10:
        raise LinalgError(f"negative eigenvalue {w.min():.3e} in fidelity")
    root = np.sqrt(np.where(w > cutoff, w, 0.0))
    return (v * root[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


def root_fidelity(rho, sigma, cutoff: float = 1e-14) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), as the trace norm of sqrt(rho) sqrt(sigma).

    Eigenvalues at or below ``cutoff`` are treated as exact zeros so
    rounding dust in a rank-deficient state does not leak in through the
    square root.

    Sub-normalised inputs (truncated states) get the generalised fidelity
    term ``sqrt((1 - tr rho)(1 - tr sigma))``: the missing weight is treated
    as one shared extra level. Without it a tail of 1e-12 swamps the
    ~1e-9 infidelity of nearby states.
    """
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"states have shapes {rho.shape} and {sigma.shape}")
    layout = BlockLayout.from_pattern(rho, sigma)
    total = 0.0
    for size in layout.groups:
        a = _stack_sqrt(layout.gather(rho, size), cutoff)
        b = _stack_sqrt(layout.gather(sigma, size), cutoff)
        total += float(np.sum(np.linalg.svd(a @ b, compute_uv=False)))
    missing_rho = max(0.0, 1.0 - float(np.real(rho.diagonal().sum())))
    missing_sigma = max(0.0, 1.0 - float(np.real(sigma.diagonal().sum())))
    return total + float(np.sqrt(missing_rho * missing_sigma))


def bures_distance(rho, sigma) -> float:
    """sqrt(2 (1 - Tr sqrt(sqrt(rho) sigma sqrt(rho))))."""
    if isinstance(rho, DensityOperator) and isinstance(sigma, DensityOperator):
        if rho.dim != sigma.dim:
            raise DimensionError(f"dimensions {rho.dim} and {sigma.dim} differ")
    f = root_fidelity(rho, sigma)
    return float(np.sqrt(2.0 * max(0.0, 1.0 - f)))


@dataclass(frozen=True)
class BuresEstimate:
    value: float
    rank_changed: bool


def _rank(m, eps: float) -> int:
    return sum(int(np.count_nonzero(w > eps)) for _, _, w, _, _ in eig_blocks(m))


def qfi_from_bures(
    state: ParametrizedState, lam: float, dlam: float = 1e-4, eps: float = DEFAULT_CUTOFF
) -> BuresEstimate:
    """4 d_B(rho(lam - dlam/2), rho(lam + dlam/2))^2 / dlam^2.

    ``rank_changed`` flags steps across which the support dimension differs;
    the small-step expansion is unreliable there.
    """
    lo = state.rho(lam - dlam / 2)
    hi = state.rho(lam + dlam / 2)
    d = bures_distance(lo, hi)
    return BuresEstimate(4.0 * d * d / (dlam * dlam), _rank(lo, eps) != _rank(hi, eps))
