"""Squared-commutator OTOCs, the summed OTOC norm, and the kinematic
four-term hierarchy for the single-qubit reduced state.

All quantities are evaluated at theta = 0 on the polarized reference
state. Commutators are built from four evolved vectors; Heisenberg
operators are never formed as matrices here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, Propagator, apply_pauli, build_hamiltonian, polarized_state
from .qfi import bloch_qfi, bloch_vector, make_tangent_pair, reduce_pair

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class OtocRecord:
    C_x: float
    C_y: float
    C_z: float
    r: np.ndarray
    dr: np.ndarray
    site: int
    tJ: float

    @property
    def C_sum(self) -> float:
        return self.C_x + self.C_y + self.C_z


def _commutator_vector(
    prop: Propagator, s: int, j: int, alpha: str, tJ: float, psi0: np.ndarray
) -> np.ndarray:
    """[sy_s, sigma_j^alpha(t)] |psi0> from four state evolutions."""
    phi = prop.apply(psi0, tJ)
    b = prop.apply(apply_pauli(phi, j, alpha), -tJ)  # sigma_j^alpha(t)|psi0>
    a = apply_pauli(psi0, s, "y")
    ba = prop.apply(apply_pauli(prop.apply(a, tJ), j, alpha), -tJ)
    return apply_pauli(b, s, "y") - ba


def squared_commutator(
    spec: ChainSpec, alpha: str, j: int, tJ: float, propagator: Propagator | None = None
) -> float:
    """C_sj^(alpha)(t) = <[sy_s, sigma_j^alpha(t)]^dag [sy_s, sigma_j^alpha(t)]>."""
    if alpha not in _AXES:
        raise ValueError(f"unknown Pauli axis {alpha!r}")
    if propagator is None:
        propagator = Propagator(build_hamiltonian(spec))
    psi0 = polarized_state(spec.N)
    c = _commutator_vector(propagator, spec.s, j, alpha, tJ, psi0)
    val = float(np.vdot(c, c).real)
    return max(val, 0.0)


def summed_otoc(
    spec: ChainSpec, j: int, tJ: float, propagator: Propagator | None = None
) -> float:
    """Summed OTOC norm C_sum = C_x + C_y + C_z at site j."""
    if propagator is None:
        propagator = Propagator(build_hamiltonian(spec))
    return sum(squared_commutator(spec, a, j, tJ, propagator) for a in _AXES)


def bloch_derivative_response(
    spec: ChainSpec, j: int, tJ: float, propagator: Propagator | None = None
) -> np.ndarray:
    """d_theta r_j^alpha at theta=0 via (i/2)<[sy_s, sigma_j^alpha(t)]>."""
    if propagator is None:
        propagator = Propagator(build_hamiltonian(spec))
    psi0 = polarized_state(spec.N)
    out = np.zeros(3)
    for i, alpha in enumerate(_AXES):
        c = _commutator_vector(propagator, spec.s, j, alpha, tJ, psi0)
        out[i] = (0.5j * np.vdot(psi0, c)).real
    return out


def hierarchy_record(
    spec: ChainSpec, j: int, tJ: float, propagator: Propagator | None = None
) -> tuple[OtocRecord, tuple[float, float, float, float | None]]:
    """OTOC record plus the four ordered hierarchy values
    ((1-|r|^2) F_j, |dr|^2, F_j, C_sum / 4(1-|r|^2)).

    The last entry is None when the local state is pure to tolerance
    (the bound is then unbounded and only the first three are meaningful).
    """
    if propagator is None:
        propagator = Propagator(build_hamiltonian(spec))
    psi0 = polarized_state(spec.N)
    components = [
        _commutator_vector(propagator, spec.s, j, alpha, tJ, psi0) for alpha in _AXES
    ]
    C = [max(float(np.vdot(c, c).real), 0.0) for c in components]
    dr = np.array([(0.5j * np.vdot(psi0, c)).real for c in components])

    pair = make_tangent_pair(spec, tJ, propagator)
    blk = reduce_pair(pair, [j])
    r = bloch_vector(blk.rho)
    record = OtocRecord(C_x=C[0], C_y=C[1], C_z=C[2], r=r, dr=dr, site=j, tJ=tJ)

    gap = 1.0 - float(r @ r)
    fj = bloch_qfi(r, bloch_vector(blk.drho))
    tangent = float(dr @ dr)
    lower = max(gap, 0.0) * fj
    upper = record.C_sum / (4.0 * gap) if gap >= 1e-10 else None
    return record, (lower, tangent, fj, upper)
