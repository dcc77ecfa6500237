"""Named numerical checks run by ``unruh-qfi verify``.

Each check measures a worst-case error over a grid and compares it with a
fixed tolerance. ``quick`` covers the 4x4 Dirac family; ``full`` adds the
bosonic truncation, hypergeometric and Bures cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import closed_forms as cf
from . import unruh
from .estimation import classical_fisher, optimal_povm, outcome_probabilities
from .linalg import eig_hermitian
from .qfi import ParametrizedState, qfi_from_bures, qfi_spectral, sld

DIRAC_THETAS = np.linspace(0.05, math.pi / 2 - 0.05, 21)
DIRAC_RADII = np.linspace(0.0, math.pi / 4 - 0.01, 21)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.measured <= self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<44s} measured={self.measured:.3e}  tol={self.tol:.1e}"


def _dirac_grid():
    for theta in DIRAC_THETAS:
        for r in DIRAC_RADII:
            yield float(theta), float(r)


def dirac_f_theta_invariance() -> float:
    return max(
        abs(qfi_spectral(unruh.dirac_channel(t, 0.3, r),
                         unruh.dirac_channel_derivative(t, 0.3, r, "theta")) - 4.0)
        for t, r in _dirac_grid()
    )


def dirac_f_phi_closed_form() -> float:
    return max(
        abs(qfi_spectral(unruh.dirac_channel(t, 0.3, r),
                         unruh.dirac_channel_derivative(t, 0.3, r, "phi")) - cf.dirac_f_phi(t, r))
        for t, r in _dirac_grid()
    )


def dirac_spectrum() -> float:
    worst = 0.0
    for t, r in _dirac_grid():
        e = unruh.dirac_eigensystem(t, 0.3, r)
        w = eig_hermitian(unruh.dirac_channel(t, 0.3, r).matrix).eigenvalues
        worst = max(worst, float(np.max(np.abs(w - [e.lam1, e.lam2, 0.0, 0.0]))) if e.lam1 >= e.lam2
                    else float(np.max(np.abs(w - [e.lam2, e.lam1, 0.0, 0.0]))))
    return worst


def dirac_subsystem() -> float:
    worst = 0.0
    for t, r in _dirac_grid():
        rho = unruh.dirac_channel(t, 0.3, r)
        d = unruh.dirac_channel_derivative(t, 0.3, r, "theta")
        red_r = unruh.reduced_state(rho, "R")
        d_r = unruh.reduced_derivative(d, "R")
        _, f_r, _, _ = cf.dirac_subsystem_qfi(t, r)
        worst = max(worst, abs(qfi_spectral(red_r, d_r) - f_r))
    return worst


def dirac_sld_residual() -> float:
    worst = 0.0
    for t, r in _dirac_grid():
        for param in ("theta", "phi"):
            rho = unruh.dirac_channel(t, 0.3, r).dense()
            d = unruh.dirac_channel_derivative(t, 0.3, r, param)
            L = sld(rho, d)
            worst = max(worst, float(np.max(np.abs(d - 0.5 * (rho @ L + L @ rho)))))
    return worst


def dirac_povm_saturation() -> float:
    worst = 0.0
    for t, r in list(_dirac_grid())[::23]:
        for param in ("theta", "phi"):
            rho = unruh.dirac_channel(t, 0.3, r)
            d = unruh.dirac_channel_derivative(t, 0.3, r, param)
            proj = optimal_povm(rho, d)
            cfi = classical_fisher(outcome_probabilities(proj, rho), outcome_probabilities(proj, d))
            worst = max(worst, abs(cfi - qfi_spectral(rho, d)))
    return worst


def dirac_derivative_formula() -> float:
    h = 1e-5
    worst = 0.0
    for t in DIRAC_THETAS:
        for r in DIRAC_RADII[1:-1]:
            fd = (cf.dirac_f_phi(t, r + h) - cf.dirac_f_phi(t, r - h)) / (2 * h)
            worst = max(worst, abs(fd - cf.dirac_f_phi_dr(t, r)), cf.dirac_f_phi_dr(t, r))
    return worst


def dirac_limit() -> float:
    return max(abs(cf.dirac_f_phi(t, math.pi / 4 - 1e-6) - cf.dirac_f_phi_limit(t)) for t in DIRAC_THETAS)


SCALAR_THETAS = np.linspace(math.pi / 20, 9 * math.pi / 20, 9)
SCALAR_RADII = np.linspace(0.0, 3.0, 13)


def scalar_f_theta_invariance() -> float:
    worst = 0.0
    for t in SCALAR_THETAS:
        for r in SCALAR_RADII:
            s = unruh.scalar_channel(float(t), 0.3, float(r))
            m = unruh.scalar_state_as_matrix(s)
            worst = max(worst, abs(qfi_spectral(m, unruh.scalar_state_derivative(s, "theta")) - 4.0))
    return worst


def scalar_triple_agreement() -> float:
    worst = 0.0
    for t in [k * math.pi / 20 for k in range(1, 6)]:
        for r in np.linspace(0.1, 2.5, 8):
            s = unruh.scalar_channel(t, 0.3, float(r))
            brute = qfi_spectral(unruh.scalar_state_as_matrix(s), unruh.scalar_state_derivative(s, "phi"))
            series = cf.scalar_f_phi_series(t, float(r))
            hyper = cf.scalar_f_phi_hyper(t, float(r))
            worst = max(worst, abs(series - hyper), abs(series - brute), abs(hyper - brute))
    return worst


def scalar_block_derivatives() -> float:
    h = 1e-6
    worst = 0.0
    for t in SCALAR_THETAS[::2]:
        for r in (0.3, 1.0):
            s = unruh.scalar_channel(float(t), 0.4, r)
            up = unruh.scalar_channel(float(t) + h, 0.4, r, n_max=s.n_max)
            dn = unruh.scalar_channel(float(t) - h, 0.4, r, n_max=s.n_max)
            worst = max(worst, float(np.max(np.abs((up.vectors - dn.vectors) / (2 * h) - s.dvectors_dtheta))))
            up = unruh.scalar_channel(float(t), 0.4 + h, r, n_max=s.n_max)
            dn = unruh.scalar_channel(float(t), 0.4 - h, r, n_max=s.n_max)
            worst = max(worst, float(np.max(np.abs((up.vectors - dn.vectors) / (2 * h) - s.dvectors_dphi))))
    return worst


def scalar_symmetry_breaking() -> float:
    """Zero when dF(0) = 0, dF(0.2) > 0 and dF(5) < 0; otherwise the offending size."""
    d0 = abs(cf.delta_f_phi_scalar(0.0))
    d_small = cf.delta_f_phi_scalar(0.2)
    d_large = cf.delta_f_phi_scalar(5.0)
    return d0 + max(0.0, -d_small) + max(0.0, d_large)


def bures_route() -> float:
    worst = 0.0
    for t, r in [(0.4, 0.2), (0.9, 0.5), (1.2, 0.7)]:
        for param in ("theta", "phi"):
            if param == "theta":
                fam = ParametrizedState(lambda x, r=r: unruh.dirac_channel(x, 0.3, r))
                lam = t
            else:
                fam = ParametrizedState(lambda x, t=t, r=r: unruh.dirac_channel(t, x, r))
                lam = 0.3
            exact = qfi_spectral(unruh.dirac_channel(t, 0.3, r), unruh.dirac_channel_derivative(t, 0.3, r, param))
            worst = max(worst, abs(qfi_from_bures(fam, lam).value - exact) / exact)
    return worst


QUICK: list[tuple[str, Callable[[], float], float]] = [
    ("dirac F_theta == 4 (spectral)", dirac_f_theta_invariance, 1e-10),
    ("dirac F_phi closed form vs spectral", dirac_f_phi_closed_form, 1e-10),
    ("dirac eigenvalues vs Jacobi", dirac_spectrum, 1e-10),
    ("dirac F_theta^R formula vs reduced state", dirac_subsystem, 1e-9),
    ("dirac SLD residual", dirac_sld_residual, 1e-9),
    ("dirac SLD-basis POVM saturates QFI", dirac_povm_saturation, 1e-8),
    ("dirac dF_phi/dr formula vs finite diff", dirac_derivative_formula, 1e-8),
    ("dirac F_phi limit at r = pi/4 - 1e-6", dirac_limit, 1e-5),
    ("dirac Bures route (relative)", bures_route, 1e-3),
]

FULL = QUICK + [
    ("scalar F_theta == 4 (spectral)", scalar_f_theta_invariance, 1e-8),
    ("scalar F_phi series/hyper/spectral", scalar_triple_agreement, 1e-8),
    ("scalar block derivatives vs finite diff", scalar_block_derivatives, 1e-8),
    ("scalar symmetry breaking signs", scalar_symmetry_breaking, 1e-12),
]


def run_checks(level: str = "quick", tol_scale: float = 1.0) -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    suite = QUICK if level == "quick" else FULL
    return [CheckResult(name, float(fn()), tol * tol_scale) for name, fn, tol in suite]
