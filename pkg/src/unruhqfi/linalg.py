"""Dense complex linear algebra for small Hermitian problems.

Eigendecompositions use a cyclic complex Jacobi method that is vectorised
over stacks of equally sized matrices. Operators with block structure (the
bosonic channel output is a direct sum of 2x2 blocks) are first split into
connected blocks from their sparsity pattern, so a 6000-dimensional state
costs a few thousand batched 2x2 rotations instead of one dense solve.

Matrices may be numpy arrays or scipy sparse matrices wherever a function
only needs the sparsity pattern and the per-block entries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
DEFAULT_CUTOFF = 1e-12
MAX_SWEEPS = 60

_EPS = np.finfo(float).eps


class LinalgError(ValueError):
    """Invalid input to a linear-algebra routine."""


class NotHermitianError(LinalgError):
    def __init__(self, defect: float, scale: float):
        self.defect = defect
        self.scale = scale
        super().__init__(
            f"matrix is not Hermitian: max|A - A^H| = {defect:.3e} "
            f"(allowed {HERMITIAN_RTOL:.0e} * max|A| = {HERMITIAN_RTOL * scale:.3e})"
        )


class NotPositiveError(LinalgError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class DimensionError(LinalgError):
    """Operand shapes are incompatible."""


class ConvergenceError(RuntimeError):
    """Jacobi sweeps hit the iteration limit."""


# ---------------------------------------------------------------------------
# helpers for dense / sparse operands


def _is_sparse(a) -> bool:
    return sp.issparse(a)


def as_matrix(a):
    """Return the raw matrix behind ``a`` (unwraps DensityOperator)."""
    if isinstance(a, DensityOperator):
        return a.matrix
    if _is_sparse(a):
        return a
    return np.asarray(a)


def to_dense(a) -> np.ndarray:
    a = as_matrix(a)
    if _is_sparse(a):
        return a.toarray()
    return np.asarray(a, dtype=complex)


def _square_dim(a) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a.shape[0]


def _max_abs(a) -> float:
    if _is_sparse(a):
        return float(abs(a).max()) if a.nnz else 0.0
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitian_defect(a) -> float:
    """max |A[i, j] - conj(A[j, i])|."""
    a = as_matrix(a)
    if _is_sparse(a):
        diff = a - a.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, rtol: float = HERMITIAN_RTOL) -> None:
    a = as_matrix(a)
    _square_dim(a)
    scale = _max_abs(a)
    defect = hermitian_defect(a)
    if defect > rtol * scale:
        raise NotHermitianError(defect, scale)


# ---------------------------------------------------------------------------
# block structure


@dataclass(frozen=True)
class BlockLayout:
    """Partition of basis indices into connected blocks.

    Two indices share a block when any of the matrices used to build the
    layout couples them. ``groups`` maps a block size to an ``(K, size)``
    array of global indices, one row per block.
    """

    labels: np.ndarray
    groups: dict[int, np.ndarray]
    slot: np.ndarray
    local: np.ndarray

    @classmethod
    def from_pattern(cls, *mats) -> "BlockLayout":
        mats = [as_matrix(m) for m in mats]
        n = _square_dim(mats[0])
        rows, cols = [], []
        for m in mats:
            if m.shape != (n, n):
                raise DimensionError(f"shape {m.shape} does not match ({n}, {n})")
            if _is_sparse(m):
                coo = m.tocoo()
                keep = coo.data != 0
                rows.append(coo.row[keep])
                cols.append(coo.col[keep])
            else:
                r, c = np.nonzero(m)
                rows.append(r)
                cols.append(c)
        r = np.concatenate(rows) if rows else np.empty(0, int)
        c = np.concatenate(cols) if cols else np.empty(0, int)
        adj = sp.coo_matrix((np.ones(r.size), (r, c)), shape=(n, n))
        _, labels = connected_components(adj, directed=False)
        return cls.from_labels(labels)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "BlockLayout":
        labels = np.asarray(labels)
        order = np.argsort(labels, kind="stable")
        sizes = np.bincount(labels)
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        slot = np.empty(labels.size, dtype=int)
        local = np.empty(labels.size, dtype=int)
        groups: dict[int, np.ndarray] = {}
        for s in np.unique(sizes):
            comps = np.flatnonzero(sizes == s)
            idx = order[starts[comps][:, None] + np.arange(s)]
            groups[int(s)] = idx
            slot[idx] = np.arange(comps.size)[:, None]
            local[idx] = np.arange(s)[None, :]
        return cls(labels=labels, groups=groups, slot=slot, local=local)

    @property
    def dim(self) -> int:
        return self.labels.size

    def gather(self, m, size: int) -> np.ndarray:
        """Stack of the ``size``-dimensional diagonal blocks of ``m``."""
        m = as_matrix(m)
        idx = self.groups[size]
        if not _is_sparse(m):
            return np.asarray(m, dtype=complex)[idx[:, :, None], idx[:, None, :]]
        coo = m.tocoo()
        coo.sum_duplicates()
        row, col, data = coo.row, coo.col, coo.data
        same = self.labels[row] == self.labels[col]
        if not np.all(same[data != 0]):
            raise DimensionError("matrix couples indices from different blocks")
        sel = same & (np.isin(row, idx.ravel()))
        out = np.zeros((idx.shape[0], size, size), dtype=complex)
        out[self.slot[row[sel]], self.local[row[sel]], self.local[col[sel]]] = data[sel]
        return out


# ---------------------------------------------------------------------------
# Jacobi eigensolver


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    g = a[:, p, q]
    mag = np.abs(g)
    active = mag > 0.0
    safe = np.where(active, mag, 1.0)
    app = a[:, p, p].real
    aqq = a[:, q, q].real
    tau = np.where(active, (aqq - app) / (2.0 * safe), 0.0)
    t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    phase = np.where(active, g / safe, 1.0)
    # U = diag(1, e^{-i alpha}) @ [[c, s], [-s, c]] zeroes A[p, q].
    upp = c
    upq = s
    uqp = -s * np.conj(phase)
    uqq = c * np.conj(phase)

    for m in (a, v):
        cp = m[:, :, p].copy()
        cq = m[:, :, q]
        m[:, :, p] = cp * upp[:, None] + cq * uqp[:, None]
        m[:, :, q] = cp * upq[:, None] + cq * uqq[:, None]
    rp = a[:, p, :].copy()
    rq = a[:, q, :]
    a[:, p, :] = np.conj(upp)[:, None] * rp + np.conj(uqp)[:, None] * rq
    a[:, q, :] = np.conj(upq)[:, None] * rp + np.conj(uqq)[:, None] * rq
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real


def jacobi_stack(stack, max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi on a stack of Hermitian matrices, shape ``(K, n, n)``.

    Returns eigenvalues ``(K, n)`` sorted descending and eigenvectors
    ``(K, n, n)`` as columns. Hermiticity is assumed, not checked.
    """
    a = np.array(stack, dtype=complex)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a (K, n, n) stack, got {a.shape}")
    k, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    if n > 1 and k > 0:
        # Hermitise exactly so rounding in the input cannot stall convergence.
        a = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
        iu = np.triu_indices(n, 1)
        scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
        thresh = 4.0 * n * _EPS * scale
        for sweep in range(max_sweeps + 1):
            off = np.sqrt(np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1))
            if np.all(off <= thresh):
                break
            if sweep == max_sweeps:
                worst = float(np.max(off - thresh))
                raise ConvergenceError(
                    f"Jacobi did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal excess {worst:.3e})"
                )
            for p in range(n - 1):
                for q in range(p + 1, n):
                    _rotate(a, v, p, q)
    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cutoff: float = DEFAULT_CUTOFF

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.eigenvalues > self.cutoff)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(
    a,
    *,
    cutoff: float = DEFAULT_CUTOFF,
    max_sweeps: int = MAX_SWEEPS,
    check: bool = True,
) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The matrix is split into connected blocks, each block size class is
    diagonalised in one batched Jacobi run, and the pieces are reassembled
    into a full (dense) eigenvector matrix.
    """
    m = as_matrix(a)
    n = _square_dim(m)
    if check:
        check_hermitian(m)
    layout = BlockLayout.from_pattern(m)
    vals = np.empty(n)
    vecs = np.zeros((n, n), dtype=complex)
    for size, idx in layout.groups.items():
        w, v = jacobi_stack(layout.gather(m, size), max_sweeps=max_sweeps)
        cols = idx  # block b's eigenpairs occupy the block's own index slots
        vals[cols] = w
        vecs[idx[:, :, None], cols[:, None, :]] = v
    order = np.argsort(-vals, kind="stable")
    return SpectralDecomposition(vals[order], vecs[:, order], cutoff)


def eig_blocks(a, *companions, max_sweeps: int = MAX_SWEEPS):
    """Blockwise eigendecomposition without assembling a dense result.

    The block layout is taken from the joint pattern of ``a`` and any
    ``companions`` (so a derivative operator never couples two blocks).
    Yields ``(size, idx, eigenvalues, eigenvectors, [companion stacks])``
    per block size class.
    """
    layout = BlockLayout.from_pattern(a, *companions)
    for size, idx in layout.groups.items():
        w, v = jacobi_stack(layout.gather(a, size), max_sweeps=max_sweeps)
        yield size, idx, w, v, [layout.gather(c, size) for c in companions]


# ---------------------------------------------------------------------------
# derived matrix functions


def sqrtm_psd(a, *, tol: float = PSD_TOL, cutoff: float = 0.0) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues below ``-tol`` are rejected; eigenvalues in ``[-tol, cutoff]``
    are set to zero before the square root is taken.
    """
    dec = eig_hermitian(a)
    w = dec.eigenvalues
    if w.size and w[-1] < -tol:
        raise NotPositiveError(f"eigenvalue {w[-1]:.3e} below -{tol:.0e}")
    root = np.sqrt(np.where(w > cutoff, w, 0.0))
    v = dec.eigenvectors
    return (v * root) @ v.conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product with row index ``i * dim(b) + k``."""
    return np.kron(to_dense(a), to_dense(b))


def partial_trace(rho, dims: tuple[int, int], keep: str, as_state: bool = True):
    """Trace out one factor of a bipartite operator.

    ``keep`` is ``"A"`` for the first factor, ``"B"`` (or ``"R"``) for the
    second. With ``as_state=False`` the result is a plain array, which is
    what derivatives of states need (they are traceless, not PSD).
    """
    da, db = dims
    m = to_dense(rho)
    if m.shape != (da * db, da * db):
        raise DimensionError(f"operator of shape {m.shape} is not {da}x{db} bipartite")
    t = m.reshape(da, db, da, db)
    key = keep.upper()
    if key == "A":
        out = np.einsum("ikjk->ij", t)
    elif key in ("B", "R"):
        out = np.einsum("kikj->ij", t)
    else:
        raise LinalgError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityOperator(out) if as_state else out


# ---------------------------------------------------------------------------
# density operators


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, PSD operator.

    Checked at construction. Eigenvalues in ``[-PSD_TOL, 0)`` are tolerated
    as truncation dust and counted in ``n_clamped``.
    """

    matrix: object
    check: bool = True
    n_clamped: int = field(default=0, init=False)

    def __post_init__(self):
        m = self.matrix
        if isinstance(m, DensityOperator):
            m = m.matrix
        if _is_sparse(m):
            m = sp.csr_matrix(m, dtype=complex)
        else:
            m = np.array(m, dtype=complex)
            m.setflags(write=False)
        _square_dim(m)
        object.__setattr__(self, "matrix", m)
        if not self.check:
            return
        check_hermitian(m)
        tr = self.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise LinalgError(f"trace {tr:.15g} differs from 1 by more than {TRACE_TOL:.0e}")
        w = np.concatenate([blk.ravel() for _, _, blk, _, _ in eig_blocks(m)])
        lowest = float(w.min()) if w.size else 0.0
        if lowest < -PSD_TOL:
            raise NotPositiveError(f"eigenvalue {lowest:.3e} below -{PSD_TOL:.0e}")
        neg = int(np.count_nonzero(w < 0))
        if neg:
            log.debug("clamped %d negative eigenvalue(s) down to %.3e", neg, lowest)
        object.__setattr__(self, "n_clamped", neg)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return _is_sparse(self.matrix)

    def trace(self) -> float:
        return float(np.real(self.matrix.diagonal().sum()))

    def dense(self) -> np.ndarray:
        return to_dense(self.matrix)

    def spectrum(self, cutoff: float = DEFAULT_CUTOFF) -> SpectralDecomposition:
        return eig_hermitian(self.matrix, cutoff=cutoff, check=False)
