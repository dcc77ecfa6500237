"""Pochhammer symbol and the Gauss hypergeometric series 2F1 for real arguments."""

from __future__ import annotations

import math
from typing import NamedTuple

DEFAULT_TOL = 1e-14
DEFAULT_MAX_TERMS = 100_000


class SeriesConvergenceError(ArithmeticError):
    def __init__(self, n_terms: int, last_term: float, partial: float):
        self.n_terms = n_terms
        self.last_term = last_term
        self.partial = partial
        super().__init__(
            f"2F1 series not converged after {n_terms} terms "
            f"(last term {last_term:.3e}, partial sum {partial:.15g})"
        )


class SeriesResult(NamedTuple):
    value: float
    n_terms: int
    tail_bound: float


def pochhammer(q: float, n: int) -> float:
    """Rising factorial (q)_n = q (q+1) ... (q+n-1), with (q)_0 = 1."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    out = 1.0
    for k in range(n):
        out *= q + k
    return out


def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _ratio_bound(a: float, b: float, c: float, z: float, n: int) -> float:
    """Upper bound on |t_{m+1} / t_m| for every m >= n.

    Valid once a+n, b+n, c+n are all positive: the ratio factors as
    |z| * (1 + (a-1)/(m+1)) * (1 + (b-c)/(c+m)), and each factor is monotone
    in m, so its supremum is at m = n or in the limit.
    """
    f1 = max(1.0, 1.0 + (a - 1.0) / (n + 1.0))
    f2 = max(1.0, 1.0 + (b - c) / (c + n))
    return abs(z) * f1 * f2


def hyp2f1_series(
    a: float,
    b: float,
    c: float,
    z: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Sum the 2F1 power series for |z| < 1.

    Terms come from the recursion t_{n+1} = t_n (a+n)(b+n) z / ((c+n)(n+1)),
    which stays finite when b and c are huge. Summation stops once a
    geometric bound on the remaining tail is below ``tol * max(1, |sum|)``.
    """
    if not abs(z) < 1.0:
        raise ValueError(f"series requires |z| < 1, got z={z}")
    if _is_nonpositive_int(c):
        raise ValueError(f"c must not be zero or a negative integer, got c={c}")
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        raise ValueError("parameters must be finite")

    term = 1.0
    total = 1.0
    n = 0
    # positivity of (a+n), (b+n), (c+n) is needed for the ratio bound
    start = max(0.0, -a, -b, -c)
    while True:
        if n >= max_terms:
            raise SeriesConvergenceError(n, abs(term), total)
        term *= (a + n) * (b + n) * z / ((c + n) * (n + 1))
        n += 1
        total += term
        if term == 0.0:
            return SeriesResult(total, n + 1, 0.0)
        if n > start:
            rho = _ratio_bound(a, b, c, z, n)
            if rho < 1.0:
                tail = abs(term) * rho / (1.0 - rho)
                if tail <= tol * max(1.0, abs(total)):
                    return SeriesResult(total, n + 1, tail)


def hyp2f1(
    a: float,
    b: float,
    c: float,
    z: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z), real arguments, |z| < 1."""
    return hyp2f1_series(a, b, c, z, tol=tol, max_terms=max_terms).value
