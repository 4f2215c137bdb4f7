"""Exponential integrals and upper incomplete gamma at non-positive integer order.

The closed-form outage needs Gamma(a, x) for a = 0, -1, -2, ... which the usual
library routines refuse (they want a > 0).  Everything here is routed through
the generalized exponential integral,

    Gamma(1 - n, x) = x**(1 - n) * E_n(x),

with E_n evaluated by a continued fraction for x >= 1 and by upward recurrence
from a power-series E_1 for x < 1.

The ``*_scaled`` variants return exp(x) times the plain value so callers can
fuse the exp(S*pi_1) / exp(S*tau) prefactors of the closed form without
overflow.
"""

from __future__ import annotations

import math

from scipy import integrate

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX_TERMS = 200
_CF_MAX_ITER = 10_000
_TINY = 1e-300
_EPS = 1e-16

# below this fraction of the minuend a scaled subtraction is redone by quadrature
_CANCELLATION_RATIO = 1e-3


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"argument must be positive and finite, got {x!r}")
    return x


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _SERIES_MAX_TERMS):
        term *= -x / k
        contrib = term / k
        total -= contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) + total


def _en_cf_scaled(n: int, x: float) -> float:
    """exp(x) E_n(x) by modified Lentz on the standard continued fraction; x >= 1."""
    b = x + n
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -i * (n - 1 + i)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"continued fraction for E_{n}({x}) did not converge")


def _en_small(n: int, x: float) -> float:
    # forward recurrence E_{k+1} = (exp(-x) - x E_k) / k, stable for x < 1
    ex = math.exp(-x)
    e = _e1_series(x)
    for k in range(1, n):
        e = (ex - x * e) / k
    return e


def exp_integral_e1(x: float) -> float:
    """E_1(x) = integral_x^inf exp(-t)/t dt for real x > 0."""
    x = _check_x(x)
    if x < 1.0:
        return _e1_series(x)
    if x > 745.0:
        return 0.0
    return _en_cf_scaled(1, x) * math.exp(-x)


def exp_integral_en(n: int, x: float) -> float:
    """E_n(x) = integral_1^inf exp(-x t) / t**n dt for integer n >= 1, x > 0."""
    n = _check_order(n)
    x = _check_x(x)
    if x < 1.0:
        return _en_small(n, x)
    if x > 745.0:
        return 0.0
    return _en_cf_scaled(n, x) * math.exp(-x)


def exp_integral_en_scaled(n: int, x: float) -> float:
    """exp(x) * E_n(x); finite for every x > 0."""
    n = _check_order(n)
    x = _check_x(x)
    if x < 1.0:
        return _en_small(n, x) * math.exp(x)
    return _en_cf_scaled(n, x)


def _check_order(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"order must be an integer >= 1, got {n!r}")
    return int(n)


def _check_gamma_order(a: int) -> int:
    if int(a) != a or a > 0:
        raise ValueError(f"order must be an integer <= 0, got {a!r}")
    return int(a)


def upper_gamma_nonpos(a: int, x: float) -> float:
    """Gamma(a, x) for integer a <= 0, computed as x**a * E_{1-a}(x)."""
    a = _check_gamma_order(a)
    x = _check_x(x)
    return x**a * exp_integral_en(1 - a, x)


def upper_gamma_nonpos_scaled(a: int, x: float) -> float:
    """exp(x) * Gamma(a, x) for integer a <= 0."""
    a = _check_gamma_order(a)
    x = _check_x(x)
    return x**a * exp_integral_en_scaled(1 - a, x)


def _gap_by_quadrature(a: int, lo: float, hi: float) -> float:
    """exp(lo) * integral_lo^hi t**(a-1) exp(-t) dt, by adaptive quadrature.

    Substituting t = lo + u keeps the integrand O(lo**(a-1)) at the left end.
    """
    gap = min(hi - lo, 750.0)

    def f(u):
        return (lo + u) ** (a - 1) * math.exp(-u)

    val, _err = integrate.quad(f, 0.0, gap, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def gamma_difference_scaled(a: int, lo: float, hi: float) -> float:
    """exp(lo) * (Gamma(a, lo) - Gamma(a, hi)) for integer a <= 0, 0 < lo <= hi.

    Falls back to direct quadrature when the two scaled tails nearly cancel.
    """
    a = _check_gamma_order(a)
    lo = _check_x(lo)
    hi = float(hi)
    if hi < lo:
        raise ValueError(f"need lo <= hi, got lo={lo!r}, hi={hi!r}")
    if hi == lo:
        return 0.0
    if (hi - lo) / lo < 1e-6:
        return _gap_by_quadrature(a, lo, hi)
    first = upper_gamma_nonpos_scaled(a, lo)
    second = math.exp(lo - hi) * upper_gamma_nonpos_scaled(a, hi)
    diff = first - second
    if diff < _CANCELLATION_RATIO * first:
        return _gap_by_quadrature(a, lo, hi)
    return diff


def e1_difference_scaled(lo: float, hi: float) -> float:
    """exp(lo) * (E_1(lo) - E_1(hi)) for 0 < lo <= hi."""
    return gamma_difference_scaled(0, lo, hi)


def e1_difference(lo: float, hi: float) -> float:
    """E_1(lo) - E_1(hi) for 0 < lo <= hi, without catastrophic cancellation.

    When exp(-lo) < 1e-10 or the endpoints are within 1e-6 relative of each
    other the integral of exp(-t)/t over [lo, hi] is evaluated directly.
    """
    lo = _check_x(lo)
    hi = float(hi)
    if not math.isfinite(hi) or hi < lo:
        raise ValueError(f"need lo <= hi, got lo={lo!r}, hi={hi!r}")
    if hi == lo:
        return 0.0
    if math.exp(-lo) < 1e-10 or (hi - lo) / lo < 1e-6:
        return math.exp(-lo) * _gap_by_quadrature(0, lo, hi)
    return math.exp(-lo) * e1_difference_scaled(lo, hi)
