"""Quantum Fisher information of a two-qubit probe under Unruh noise.

The input state cos(theta)|00> + e^{i phi} sin(theta)|11> is shared by an
inertial and a uniformly accelerated observer; the accelerated mode is
degraded by the scalar (bosonic) or Dirac (fermionic) Unruh channel.
"""

__version__ = "0.1.0"

from .closed_forms import (
    closed_form,
    delta_f_phi_scalar,
    dirac_f_phi,
    dirac_f_phi_limit,
    dirac_subsystem_qfi,
    scalar_f_phi_hyper,
    scalar_f_phi_series,
)
from .estimation import EstimationRun, simulate_crb
from .linalg import DensityOperator, eig_hermitian, partial_trace, sqrtm_psd
from .qfi import QfiBreakdown, bures_distance, qfi_from_bures, qfi_spectral, qfi_support, sld
from .specfun import hyp2f1
from .unruh import (
    channel_pair,
    dirac_channel,
    dirac_eigensystem,
    r_from_acceleration,
    scalar_channel,
    scalar_state_as_matrix,
)

__all__ = [
    "DensityOperator",
    "EstimationRun",
    "QfiBreakdown",
    "bures_distance",
    "channel_pair",
    "closed_form",
    "delta_f_phi_scalar",
    "dirac_channel",
    "dirac_eigensystem",
    "dirac_f_phi",
    "dirac_f_phi_limit",
    "dirac_subsystem_qfi",
    "eig_hermitian",
    "hyp2f1",
    "partial_trace",
    "qfi_from_bures",
    "qfi_spectral",
    "qfi_support",
    "r_from_acceleration",
    "scalar_channel",
    "scalar_f_phi_hyper",
    "scalar_f_phi_series",
    "scalar_state_as_matrix",
    "simulate_crb",
    "sld",
]
