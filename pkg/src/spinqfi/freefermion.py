"""Closed-form h=0 baselines: single-particle propagators and QFI profiles.

Sites are 1-based. The semi-infinite wall sits at j=0, so the image term
carries j+s; an off-by-one here silently breaks the s=1 recurrence check.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .bessel import bessel_j


def green_infinite(n: int, tJ: float, J: float = 1.0) -> complex:
    """Infinite-chain propagator (-i)^n J_n(4Jt) at site offset n."""
    return (-1j) ** (int(n) % 4) * bessel_j(n, 4.0 * J * tJ)


def green_semi_infinite(j: int, s: int, tJ: float, J: float = 1.0) -> complex:
    """Semi-infinite chain (hard wall at site 0): direct term minus image."""
    if j < 1 or s < 1:
        raise ValueError("sites must be >= 1")
    z = 4.0 * J * tJ
    return (-1j) ** ((j - s) % 4) * bessel_j(j - s, z) - (-1j) ** ((j + s) % 4) * bessel_j(
        j + s, z
    )


def green_open(N: int, j: int, s: int, tJ: float, J: float = 1.0) -> complex:
    """Finite open chain: standing-wave propagator."""
    if not (1 <= j <= N and 1 <= s <= N):
        raise ValueError(f"sites ({j}, {s}) outside 1..{N}")
    m = np.arange(1, N + 1)
    q = m * np.pi / (N + 1)
    amps = np.sin(q * j) * np.sin(q * s) * np.exp(-4j * J * tJ * np.cos(q))
    return complex(2.0 / (N + 1) * amps.sum())


def green_open_row(N: int, s: int, tJ: float, J: float = 1.0) -> np.ndarray:
    """G_{j,s}(t) for all j = 1..N at once."""
    if not 1 <= s <= N:
        raise ValueError(f"site {s} outside 1..{N}")
    m = np.arange(1, N + 1)
    q = m * np.pi / (N + 1)
    phases = np.sin(q * s) * np.exp(-4j * J * tJ * np.cos(q))
    sines = np.sin(np.outer(np.arange(1, N + 1), q))
    return 2.0 / (N + 1) * sines @ phases


def qfi_profile_analytic(
    kind: str,
    s: int,
    tJ: float,
    N: int | None = None,
    J: float = 1.0,
    offsets: Iterable[int] | None = None,
) -> np.ndarray:
    """Single-site QFI profile |G_{j,s}|^2.

    kind 'open' needs N and returns the profile over j = 1..N (sums to 1).
    kinds 'infinite' / 'semi_infinite' return the profile over ``offsets``
    (site offsets n for infinite, absolute sites j >= 1 for semi_infinite).
    """
    if kind == "open":
        if N is None:
            raise ValueError("kind 'open' requires N")
        return np.abs(green_open_row(N, s, tJ, J)) ** 2
    if kind == "infinite":
        if offsets is None:
            raise ValueError("kind 'infinite' requires offsets")
        return np.array([abs(green_infinite(n, tJ, J)) ** 2 for n in offsets])
    if kind == "semi_infinite":
        if offsets is None:
            raise ValueError("kind 'semi_infinite' requires offsets (sites j)")
        return np.array([abs(green_semi_infinite(j, s, tJ, J)) ** 2 for j in offsets])
    raise ValueError(f"unknown kind {kind!r}")


def block_weight_analytic(
    block: Iterable[int], N: int, s: int, tJ: float, J: float = 1.0
) -> float:
    """Block weight p_A(t) = sum_{l in A} |G_{l,s}|^2 for a finite open chain."""
    sites = sorted(set(block))
    if not sites:
        raise ValueError("empty block")
    if sites[0] < 1 or sites[-1] > N:
        raise ValueError(f"block sites outside 1..{N}")
    profile = np.abs(green_open_row(N, s, tJ, J)) ** 2
    return float(sum(profile[l - 1] for l in sites))
