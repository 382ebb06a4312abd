"""Tangent-state construction, bit-indexed partial traces, QFI evaluators.

Everything is evaluated at the operating point theta = 0: the parametric
family is rho_theta = |psi_theta><psi_theta| with
d_theta rho|_0 = |chi><psi| + |psi><chi|.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, Propagator, apply_pauli, build_hamiltonian, polarized_state

_EPS_PURE = 1e-10
_EPS_SPEC = 1e-12


@dataclass(frozen=True)
class TangentPair:
    """Evolved reference state and evolved tangent (norm 1/2) at theta=0."""

    psi: np.ndarray
    chi: np.ndarray
    tJ: float
    spec: ChainSpec


@dataclass(frozen=True)
class DensityBlock:
    """Reduced density matrix and its parameter derivative on `sites`."""

    rho: np.ndarray
    drho: np.ndarray
    sites: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.sites)


def make_tangent_pair(
    spec: ChainSpec, tJ: float, propagator: Propagator | None = None
) -> TangentPair:
    """Evolve the vacuum and the localized tangent (1/2)|s> to time tJ."""
    if propagator is None:
        propagator = Propagator(build_hamiltonian(spec))
    psi0 = polarized_state(spec.N)
    chi0 = -0.5j * apply_pauli(psi0, spec.s, "y")  # = (1/2)|s>
    return TangentPair(
        psi=propagator.apply(psi0, tJ),
        chi=propagator.apply(chi0, tJ),
        tJ=tJ,
        spec=spec,
    )


def _block_index_matrix(N: int, sites: Sequence[int]) -> np.ndarray:
    """idx[b, e]: full basis index with block bits b scattered onto `sites`
    and environment bits e onto the complement. Block-local bit p encodes
    sites[p]."""
    sites0 = [s - 1 for s in sites]
    if len(set(sites0)) != len(sites0):
        raise ValueError(f"duplicate sites in {sites}")
    if sites0 and (min(sites0) < 0 or max(sites0) >= N):
        raise ValueError(f"sites {sites} outside 1..{N}")
    env0 = [i for i in range(N) if i not in sites0]

    def scatter(positions: list[int]) -> np.ndarray:
        codes = np.arange(1 << len(positions))
        out = np.zeros(codes.size, dtype=np.int64)
        for p, pos in enumerate(positions):
            out |= ((codes >> p) & 1) << pos
        return out

    b_vals = scatter(sites0)
    e_vals = scatter(env0)
    return b_vals[:, None] | e_vals[None, :]


def reduce_pair(pair: TangentPair, sites: Sequence[int]) -> DensityBlock:
    """Partial trace of (rho, d_theta rho) onto `sites`, by bit-indexed gather."""
    if not sites:
        raise ValueError("empty site list")
    idx = _block_index_matrix(pair.spec.N, sites)
    psi_m = pair.psi[idx]
    chi_m = pair.chi[idx]
    rho = psi_m @ psi_m.conj().T
    drho = chi_m @ psi_m.conj().T + psi_m @ chi_m.conj().T
    return DensityBlock(rho=rho, drho=drho, sites=tuple(sites))


def bloch_qfi(r: np.ndarray, dr: np.ndarray) -> float:
    """Single-qubit QFI from the Bloch vector and its parameter derivative."""
    r = np.asarray(r, dtype=float)
    dr = np.asarray(dr, dtype=float)
    r2 = float(r @ r)
    if r2 > 1.0 + 1e-12:
        raise ValueError(f"unphysical Bloch vector, |r|^2 = {r2}")
    tangent = float(dr @ dr)
    radial_num = float(r @ dr)
    gap = 1.0 - r2
    if gap < _EPS_PURE:
        if abs(radial_num) < 1e-8:
            return tangent  # pure-state limit, understood by continuity
        raise ValueError(
            f"singular radial term: 1-|r|^2 = {gap:.3e} with r.dr = {radial_num:.3e}"
        )
    return tangent + radial_num**2 / gap


def spectral_qfi_matrices(rho: np.ndarray, drho: np.ndarray) -> float:
    """Spectral QFI 2 sum_{mu,nu} |<mu|drho|nu>|^2 / (lam_mu + lam_nu)."""
    lam, vecs = np.linalg.eigh(rho)
    d = vecs.conj().T @ drho @ vecs
    pair_sum = lam[:, None] + lam[None, :]
    keep = pair_sum > _EPS_SPEC * max(lam[-1], _EPS_SPEC)
    val = 2.0 * float(np.sum(np.abs(d[keep]) ** 2 / pair_sum[keep]))
    return max(val, 0.0)


def spectral_qfi(block: DensityBlock) -> float:
    herm_dev = max(
        np.abs(block.rho - block.rho.conj().T).max(),
        np.abs(block.drho - block.drho.conj().T).max(),
    )
    if herm_dev > 1e-10:
        raise ValueError(f"non-Hermitian block input, deviation {herm_dev:.3e}")
    return spectral_qfi_matrices(block.rho, block.drho)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch components of a 2x2 matrix (works for rho and for drho)."""
    return np.array(
        [
            2.0 * rho[0, 1].real,
            -2.0 * rho[0, 1].imag,
            (rho[0, 0] - rho[1, 1]).real,
        ]
    )


def site_qfi(pair: TangentPair, j: int) -> float:
    """Bare single-site QFI at probe site j."""
    return spectral_qfi(reduce_pair(pair, [j]))


def site_qfi_profile(pair: TangentPair) -> np.ndarray:
    return np.array([site_qfi(pair, j) for j in range(1, pair.spec.N + 1)])


def block_qfi(pair: TangentPair, sites: Sequence[int]) -> float:
    """Exact QFI of the reduced state on `sites`."""
    return spectral_qfi(reduce_pair(pair, sites))
