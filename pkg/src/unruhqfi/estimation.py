"""Monte Carlo check that the QFI is attainable.

Measurements are simulated in the eigenbasis of the SLD at the true
parameter, and the parameter is recovered by maximum likelihood. The
measurement is fixed at the true value, so this is the idealised local
benchmark: the estimator variance should approach 1 / (M F).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import unruh
from .linalg import DEFAULT_CUTOFF, as_matrix, eig_hermitian, to_dense
from .qfi import qfi_spectral, sld

DEGENERACY_TOL = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimationError(ValueError):
    """The requested estimation problem carries no information."""


def optimal_povm(rho, drho, eps: float = DEFAULT_CUTOFF, degeneracy_tol: float = DEGENERACY_TOL):
    """Projectors onto the eigenspaces of the SLD.

    Eigenvectors whose SLD eigenvalues agree within ``degeneracy_tol`` are
    merged into one projector; the eigenvalue-zero space absorbs the
    complement of the support. The projectors sum to the identity.
    """
    L = sld(rho, drho, eps)
    dec = eig_hermitian(L, check=False)
    vals, vecs = dec.eigenvalues, dec.eigenvectors
    projectors = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or abs(vals[i] - vals[start]) > degeneracy_tol:
            v = vecs[:, start:i]
            projectors.append(v @ v.conj().T)
            start = i
    return projectors


def outcome_probabilities(projectors, rho) -> np.ndarray:
    r = to_dense(rho)
    return np.array([float(np.real(np.vdot(e, r))) for e in projectors])


def classical_fisher(probs, dprobs, eps: float = DEFAULT_CUTOFF) -> float:
    """sum_k p'_k^2 / p_k over outcomes with p_k > eps."""
    p = np.asarray(probs, dtype=float)
    dp = np.asarray(dprobs, dtype=float)
    keep = p > eps
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Maximiser of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class EstimationRun:
    field: str
    theta: float
    phi: float
    r: float
    target: str
    samples: int = 10_000
    trials: int = 200
    seed: int = 20140101
    half_width: float = 0.5
    n_max: int | None = None

    def __post_init__(self):
        unruh.check_theta(self.theta)
        unruh.check_phi(self.phi)
        unruh.check_r(self.field, self.r)
        unruh.check_param(self.target)
        if self.samples < 100 or self.trials < 50:
            raise ValueError("need samples >= 100 and trials >= 50 for a meaningful variance")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CrbReport:
    true_value: float
    qfi: float
    mean: float
    variance: float
    mse: float
    crb_ratio: float
    samples: int
    trials: int
    seed: int
    estimates: np.ndarray = field(repr=False)


class ChannelFamily:
    """rho(lambda) along one parameter of the channel output, the other held fixed."""

    def __init__(self, run: EstimationRun):
        self.run = run
        self.n_max = run.n_max
        if run.field == unruh.SCALAR and self.n_max is None:
            # fixed basis across the likelihood scan, sized for the widest window
            self.n_max = unruh.scalar_n_max(math.pi / 2, run.r)

    def truth(self) -> float:
        return self.run.theta if self.run.target == "theta" else self.run.phi

    def _args(self, lam: float) -> tuple[float, float]:
        if self.run.target == "theta":
            return lam, self.run.phi
        return self.run.theta, lam

    def rho(self, lam: float):
        theta, phi = self._args(lam)
        if self.run.field == unruh.DIRAC:
            return unruh.dirac_channel(theta, phi, self.run.r).matrix
        s = unruh.scalar_channel(theta, phi, self.run.r, n_max=self.n_max)
        return unruh.scalar_state_as_matrix(s, sparse=False).matrix

    def pair(self, lam: float):
        theta, phi = self._args(lam)
        if self.run.field == unruh.DIRAC:
            return (unruh.dirac_channel(theta, phi, self.run.r).matrix,
                    unruh.dirac_channel_derivative(theta, phi, self.run.r, self.run.target))
        s = unruh.scalar_channel(theta, phi, self.run.r, n_max=self.n_max)
        return (unruh.scalar_state_as_matrix(s, sparse=False).matrix,
                unruh.scalar_state_derivative(s, self.run.target, sparse=False))

    def window(self) -> tuple[float, float]:
        lam0, w = self.truth(), self.run.half_width
        if self.run.target == "theta":
            return max(0.0, lam0 - w), min(math.pi / 2, lam0 + w)
        return lam0 - w, lam0 + w


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, trial)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial,))))


def simulate_crb_family(
    family: ChannelFamily, samples: int, trials: int, seed: int
) -> CrbReport:
    lam0 = family.truth()
    rho0, drho0 = family.pair(lam0)
    qfi = qfi_spectral(rho0, drho0)
    if qfi <= 1e-10:
        raise EstimationError(f"QFI {qfi:.3e} vanishes at the true point; nothing to estimate")
    projectors = optimal_povm(rho0, drho0)
    p0 = outcome_probabilities(projectors, rho0)
    if np.max(p0) >= 1.0 - 1e-12:
        raise EstimationError("the optimal measurement has a deterministic outcome")
    stack = np.array(projectors)
    lo, hi = family.window()

    def probs(lam: float) -> np.ndarray:
        r = to_dense(as_matrix(family.rho(lam)))
        return np.real(np.einsum("kij,ji->k", stack, r))

    estimates = np.empty(trials)
    for t in range(trials):
        p = np.clip(p0, 0.0, None)
        counts = trial_generator(seed, t).multinomial(samples, p / p.sum())
        seen = counts > 0

        def loglik(lam: float) -> float:
            q = probs(lam)[seen]
            if np.any(q <= 0.0):
                return -math.inf
            return float(np.sum(counts[seen] * np.log(q)))

        estimates[t] = golden_section_max(loglik, lo, hi)

    variance = float(np.var(estimates, ddof=1))
    mse = float(np.mean((estimates - lam0) ** 2))
    return CrbReport(
        true_value=lam0,
        qfi=qfi,
        mean=float(np.mean(estimates)),
        variance=variance,
        mse=mse,
        crb_ratio=variance * samples * qfi,
        samples=samples,
        trials=trials,
        seed=seed,
        estimates=estimates,
    )


def simulate_crb(run: EstimationRun) -> CrbReport:
    """Variance of the maximum-likelihood estimate against the Cramer-Rao bound."""
    return simulate_crb_family(ChannelFamily(run), run.samples, run.trials, run.seed)
