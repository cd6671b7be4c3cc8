"""Bessel functions of the first kind for real, non-negative order and argument.

Only what the buckling model needs: J_nu(x) for nu >= 0 and x >= 0, accurate
to ~1e-12 absolute on [0, 50]. Small arguments use the ascending power
series; large arguments use Hankel's asymptotic expansion. The switch happens
at ``SERIES_LIMIT``: below it the largest series term stays under ~2e4, so
cancellation costs at most four digits, and above it the asymptotic series
can be summed to its smallest term (~exp(-2x)) before it diverges.
"""

from __future__ import annotations

import math

from scipy.optimize import brentq

SERIES_LIMIT = 12.0
_MAX_TERMS = 500


class BesselDomainError(ValueError):
    pass


def _series(nu: float, x: float) -> float:
    half = 0.5 * x
    # x**nu / 2**nu rather than (x/2)**nu: x/2 underflows for the smallest subnormals
    term = x**nu / (2.0**nu * math.gamma(nu + 1.0))
    if term == 0.0:
        return 0.0
    q = -half * half
    terms = [term]
    for k in range(1, _MAX_TERMS):
        term *= q / (k * (k + nu))
        terms.append(term)
        if abs(term) < 1e-18 * abs(terms[0]) and k > 2:
            break
    return math.fsum(terms)


def _asymptotic(nu: float, x: float) -> float:
    mu = 4.0 * nu * nu
    omega = x - 0.5 * nu * math.pi - 0.25 * math.pi
    p_terms = [1.0]
    q_terms = []
    a = 1.0
    prev = math.inf
    for k in range(1, _MAX_TERMS):
        a *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(a) >= prev:
            break  # series started diverging; stop at the smallest term
        prev = abs(a)
        # a_k carries the sign pattern (-1)^floor(k/2) in P and Q
        if k % 2 == 0:
            p_terms.append(a if (k // 2) % 2 == 0 else -a)
        else:
            q_terms.append(a if ((k - 1) // 2) % 2 == 0 else -a)
        if abs(a) < 1e-17:
            break
    p = math.fsum(p_terms)
    q = math.fsum(q_terms)
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(omega) - q * math.sin(omega))


def besselj(nu: float, x: float) -> float:
    """J_nu(x) for ``nu >= 0`` and ``x >= 0``."""
    if nu < 0:
        raise BesselDomainError(f"order must be non-negative, got {nu}")
    if not x >= 0:
        raise BesselDomainError(f"argument must be non-negative, got {x}")
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    if x <= SERIES_LIMIT:
        return _series(nu, x)
    return _asymptotic(nu, x)


def bessel_j_quarter(x: float) -> float:
    """J_{1/4}(x), the kernel of the ribbon's lateral-torsional mode."""
    return besselj(0.25, x)


def first_zero(nu: float = 0.25, bracket: tuple[float, float] | None = None) -> float:
    """First positive zero of J_nu located by bracketed root finding.

    The default bracket [nu + 1, nu + 4] contains j_{nu,1} for 0 <= nu <= 1.
    """
    lo, hi = bracket if bracket is not None else (nu + 1.0, nu + 4.0)
    return brentq(lambda x: besselj(nu, x), lo, hi, xtol=1e-14, rtol=1e-15)
