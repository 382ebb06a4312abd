"""Bessel functions of the first kind, J_n, for the propagator formulas.

Computed in-house: ascending power series for small arguments, downward
Miller recurrence with sum-rule normalization otherwise. Double precision
is sufficient for the arguments used here (|x| <= ~25, |n| <= 60).
"""

from __future__ import annotations

import math

import numpy as np

_SERIES_CUTOFF = 2.0


def _bessel_series(n: int, x: float) -> float:
    # J_n(x) = sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!), n >= 0
    half = x / 2.0
    term = half**n / math.factorial(n)
    total = term
    k = 0
    while abs(term) > 1e-18 * max(abs(total), 1e-30) and k < 200:
        k += 1
        term *= -(half * half) / (k * (n + k))
        total += term
    return total


def _bessel_miller(n_max: int, x: float) -> np.ndarray:
    """J_0..J_{n_max}(x) by downward recurrence, normalized via
    J_0 + 2 sum_{k>=1} J_{2k} = 1."""
    if x == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    start = n_max + int(20 + 2.0 * abs(x) ** 0.5 * 4 + abs(x))
    start += start % 2  # even starting order
    jp, j = 0.0, 1e-30
    vals = np.zeros(start + 1)
    vals[start] = j
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * j - jp
        jp, j = j, jm
        vals[k - 1] = j
        if abs(j) > 1e250:  # rescale to avoid overflow
            vals[k - 1 :] /= abs(j)
            jp /= abs(j)
            j = vals[k - 1]
    norm = vals[0] + 2.0 * vals[2::2].sum()
    return vals[: n_max + 1] / norm


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer n (any sign) and real x."""
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2 == 1:
            sign = -sign
    if x < 0:
        if n % 2 == 1:
            sign = -sign
        x = -x
    if x <= _SERIES_CUTOFF or x < 0.2 * n:
        return sign * _bessel_series(n, x)
    return sign * float(_bessel_miller(n, x)[n])


def bessel_j_array(n_max: int, x: float) -> np.ndarray:
    """J_0(x)..J_{n_max}(x) in one pass (x >= 0)."""
    if x < 0:
        raise ValueError("bessel_j_array needs x >= 0")
    if x <= _SERIES_CUTOFF:
        return np.array([_bessel_series(n, x) for n in range(n_max + 1)])
    return _bessel_miller(n_max, x)
