"""Analytic QFI expressions for the two-qubit family under Unruh noise.

Everything here is a direct evaluation; the brute-force engines in
:mod:`unruhqfi.qfi` are the cross-checks. For the scalar phase QFI the
truncated series is authoritative and the hypergeometric closed form is a
validation target.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import hyperu

from . import unruh
from .specfun import hyp2f1

SERIES_TAIL_TOL = 1e-14
DIRECT_TERM_CAP = 4_000_000
EM_SPLIT = 100_000
CHUNK = 1 << 18
COT_LIMIT = 1e6


class SeriesValue(NamedTuple):
    value: float
    n_terms: int
    error_bound: float
    method: str


def _check(theta: float, r: float, field: str = unruh.SCALAR) -> None:
    unruh.check_theta(theta)
    unruh.check_r(field, r)


def inertial_qfi(theta: float) -> tuple[float, float]:
    """(F_theta, F_phi) of the input state with no acceleration."""
    unruh.check_theta(theta)
    return 4.0, math.sin(2 * theta) ** 2


# ---------------------------------------------------------------------------
# scalar field


def scalar_f_theta(theta: float, r: float) -> float:
    _check(theta, r)
    return 4.0


def scalar_f_theta_parts(theta: float, r: float, n_max: int | None = None) -> tuple[float, float]:
    """Truncated classical and quantum parts of the scalar F_theta."""
    _check(theta, r)
    if n_max is None:
        n_max = unruh.scalar_n_max(theta, r)
    ch2 = math.cosh(r) ** 2
    n = np.arange(n_max + 1, dtype=float)
    w = np.tanh(r) ** (2 * n) / ch2
    big_theta = math.cos(theta) ** 2 + (n + 1) * math.sin(theta) ** 2 / ch2
    big_lambda = math.sin(theta) ** 2 + (n + 1) * math.cos(theta) ** 2 / ch2
    d_big_theta = math.sin(2 * theta) * ((n + 1) / ch2 - 1.0)
    ratio = d_big_theta**2 / big_theta
    return float(np.sum(w * ratio)), float(np.sum(w * (4.0 * big_lambda - ratio)))


def _series_terms(theta: float, r: float, start: int, stop: int) -> np.ndarray:
    n = np.arange(start, stop, dtype=float)
    ch2 = math.cosh(r) ** 2
    t = math.tanh(r) ** 2
    big_theta = math.cos(theta) ** 2 + (n + 1) * math.sin(theta) ** 2 / ch2
    return (n + 1) * np.power(t, n) / big_theta


def _em_tail(theta: float, r: float, start: int) -> tuple[float, float]:
    """Euler-Maclaurin estimate of sum_{n >= start} (n+1) t^n / Theta_n.

    Writes the summand as L e^{-beta x} (1 - k / (x + 1 + k)) with
    L = cosh^2 r / sin^2 theta, k = cosh^2 r cot^2 theta, beta = -ln t, and
    integrates it in closed form with the exponential integral, expressed
    through U(1, 1, x) = e^x E1(x) to stay finite.
    """
    ch2 = math.cosh(r) ** 2
    big_l = ch2 / math.sin(theta) ** 2
    k = ch2 / math.tan(theta) ** 2
    beta = -2.0 * math.log(math.tanh(r))
    x0 = float(start)
    y0 = x0 + 1.0 + k
    decay = math.exp(-beta * x0)
    integral = big_l * decay * (1.0 / beta - k * float(hyperu(1.0, 1.0, beta * y0)))

    def deriv(m: int) -> float:
        # m-th derivative at x0 of e^{-beta x} h(x), h = 1 - k / (x + 1 + k)
        total = (-beta) ** m * (1.0 - k / y0)
        for j in range(1, m + 1):
            hj = -k * (-1.0) ** j * math.factorial(j) / y0 ** (j + 1)
            total += math.comb(m, j) * (-beta) ** (m - j) * hj
        return big_l * decay * total

    f0 = big_l * decay * (1.0 - k / y0)
    tail = integral + 0.5 * f0 - deriv(1) / 12.0 + deriv(3) / 720.0
    err = abs(deriv(5)) / 30240.0
    return tail, err


def scalar_f_phi_detail(theta: float, r: float, tail_tol: float = SERIES_TAIL_TOL) -> SeriesValue:
    """Scalar phase QFI from its block series, with a bound on what was dropped.

    Direct summation stops at the first N with 4 cos^2(theta) t^N <= tail_tol,
    which bounds the remaining tail because (n+1)/Theta_n increases towards
    cosh^2 r / sin^2 theta. When that N is out of reach (tanh^2 r within
    ~1e-6 of 1) the tail past ``EM_SPLIT`` terms is closed by Euler-Maclaurin
    and the bound is the size of the first omitted correction.
    """
    _check(theta, r)
    s2 = math.sin(2 * theta) ** 2
    if s2 == 0.0 or r == 0.0:
        return SeriesValue(s2, 1, 0.0, "direct")
    prefactor = s2 / math.cosh(r) ** 4
    t = math.tanh(r) ** 2
    if theta == math.pi / 2 or math.cos(theta) ** 2 == 0.0:
        return SeriesValue(0.0, 1, 0.0, "direct")
    if t == 0.0:
        # tanh^2 r underflowed: only the n = 0 term survives
        return SeriesValue(prefactor * float(_series_terms(theta, r, 0, 1)[0]), 1, 0.0, "direct")
    bound_scale = 4.0 * math.cos(theta) ** 2
    needed = math.ceil(math.log(tail_tol / bound_scale) / math.log(t)) if t < 1 else None
    if needed is not None and needed <= DIRECT_TERM_CAP:
        n_terms = max(needed, 1)
        total = 0.0
        for lo in range(0, n_terms, CHUNK):
            total += float(np.sum(_series_terms(theta, r, lo, min(lo + CHUNK, n_terms))))
        return SeriesValue(prefactor * total, n_terms, bound_scale * t**n_terms, "direct")

    head = float(np.sum(_series_terms(theta, r, 0, EM_SPLIT)))
    tail, err = _em_tail(theta, r, EM_SPLIT)
    return SeriesValue(prefactor * (head + tail), EM_SPLIT, prefactor * err, "euler-maclaurin")


def scalar_f_phi_series(theta: float, r: float, tail_tol: float = SERIES_TAIL_TOL) -> float:
    """sin^2(2 theta) / cosh^4 r * sum_n (n+1) tanh^{2n} r / Theta_n."""
    return scalar_f_phi_detail(theta, r, tail_tol).value


def scalar_f_phi_hyper(theta: float, r: float) -> float:
    """Hypergeometric closed form of the scalar phase QFI.

    Refuses |cot theta| > COT_LIMIT (and the endpoints), where the series
    route should be used instead.
    """
    _check(theta, r)
    if theta <= 0.0 or theta >= math.pi / 2:
        raise ValueError("theta at an endpoint of (0, pi/2); use scalar_f_phi_series")
    cot2 = 1.0 / math.tan(theta) ** 2
    if math.sqrt(cot2) > COT_LIMIT:
        raise ValueError(f"|cot theta| > {COT_LIMIT:g}; use scalar_f_phi_series")
    ch2 = math.cosh(r) ** 2
    sech2 = 1.0 / ch2
    z = math.tanh(r) ** 2
    k = ch2 * cot2
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    f1 = hyp2f1(1.0, 1.0 + k, 2.0 + k, z)
    f2 = hyp2f1(2.0, 2.0 + k, 3.0 + k, z)
    num = sech2**2 * math.sin(2 * theta) ** 2 * (
        f1 * (c2 + 2 * sech2 * s2) + f2 * (c2 + sech2 * s2) * z
    )
    den = c2**2 + 3 * sech2 * s2 * c2 + 2 * sech2**2 * s2**2
    return num / den


def delta_f_phi_scalar(r: float, tail_tol: float = SERIES_TAIL_TOL) -> float:
    """F_phi(theta = pi/3) - F_phi(theta = pi/6) for the scalar field."""
    return scalar_f_phi_series(math.pi / 3, r, tail_tol) - scalar_f_phi_series(math.pi / 6, r, tail_tol)


def scalar_f_phi_large_r(theta: float, radii=(3.0, 4.0, 5.0, 6.0, 8.0, 10.0)) -> float:
    """Extrapolate the scalar phase QFI to infinite acceleration.

    Fits F(r) = F_inf + a / cosh^2 r + b / cosh^4 r over the given radii by
    least squares and returns F_inf. A diagnostic, not a certified limit.
    """
    x = np.array([1.0 / math.cosh(r) ** 2 for r in radii])
    y = np.array([scalar_f_phi_series(theta, r) for r in radii])
    design = np.column_stack([np.ones_like(x), x, x * x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# Dirac field


def dirac_f_theta(theta: float, r: float) -> float:
    _check(theta, r, unruh.DIRAC)
    return 4.0


def dirac_f_theta_parts(theta: float, r: float) -> tuple[float, float]:
    """(F_C, F_Q) of the Dirac F_theta."""
    _check(theta, r, unruh.DIRAC)
    den = 1.0 - math.sin(r) ** 2 * math.cos(theta) ** 2
    f_c = 4.0 * math.sin(r) ** 2 * math.sin(theta) ** 2 / den
    f_q = 4.0 * math.cos(r) ** 2 / den
    return f_c, f_q


def dirac_f_phi(theta: float, r: float) -> float:
    """cos^2 r sin^2(2 theta) / (1 - sin^2 r cos^2 theta)."""
    _check(theta, r, unruh.DIRAC)
    return math.cos(r) ** 2 * math.sin(2 * theta) ** 2 / (1.0 - math.sin(r) ** 2 * math.cos(theta) ** 2)


def dirac_f_phi_dr(theta: float, r: float) -> float:
    """d F_phi / d r for the Dirac field; never positive."""
    _check(theta, r, unruh.DIRAC)
    den = 1.0 - math.sin(r) ** 2 * math.cos(theta) ** 2
    return -4.0 * math.sin(2 * r) * math.sin(theta) ** 4 * math.cos(theta) ** 2 / den**2


def dirac_f_phi_limit(theta: float) -> float:
    """Dirac F_phi as r -> pi/4: (1 - cos 4 theta) / (3 - cos 2 theta)."""
    unruh.check_theta(theta)
    return (1.0 - math.cos(4 * theta)) / (3.0 - math.cos(2 * theta))


def dirac_subsystem_qfi(theta: float, r: float) -> tuple[float, float, float, float]:
    """(F_theta^A, F_theta^R, F_phi^A, F_phi^R) of the reduced Dirac states."""
    _check(theta, r, unruh.DIRAC)
    q = math.cos(r) ** 2 * math.cos(theta) ** 2
    num = 4.0 * math.cos(r) ** 2 * math.sin(theta) ** 2
    # at theta = r = 0 the reduced state of Rob is pure and the limit is 4
    f_r = 4.0 if q == 1.0 else num / (1.0 - q)
    return 4.0, f_r, 0.0, 0.0


def closed_form(field: str, theta: float, r: float, param: str) -> float:
    """Closed-form QFI for either field and parameter."""
    unruh.check_param(param)
    if param == "theta":
        return scalar_f_theta(theta, r) if field == unruh.SCALAR else dirac_f_theta(theta, r)
    if field == unruh.SCALAR:
        return scalar_f_phi_series(theta, r)
    return dirac_f_phi(theta, r)
