"""Computational-basis core: chain description, Hamiltonian, exact evolution.

Basis convention (fixed globally): basis index ``n`` encodes site ``i``
(1-based) in bit ``i-1``; bit value 0 is spin-up (vacuum), bit value 1 is
spin-down (one magnon at that site). Times are always in units of 1/J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

# Dense eigendecomposition is the reference evolution path up to this size;
# above it the exponential-action (Krylov) path takes over.
DENSE_MAX_N = 12
MAX_N = 14  # guard for dense evolution paths, not physics

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class ChainSpec:
    """Immutable physical problem description."""

    N: int
    J: float = 1.0
    h: float = 0.0
    s: int = 1
    boundary: str = "open"

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"need N >= 1, got {self.N}")
        if self.N > MAX_N:
            raise ValueError(f"dense evolution capped at N = {MAX_N}, got {self.N}")
        if self.boundary != "open":
            raise ValueError(f"unsupported boundary {self.boundary!r}")
        if not self.J > 0:
            raise ValueError(f"need J > 0, got {self.J}")
        if self.h < 0:
            raise ValueError(f"need h >= 0, got {self.h}")
        if not 1 <= self.s <= self.N:
            raise ValueError(f"source site {self.s} outside 1..{self.N}")

    @property
    def dim(self) -> int:
        return 1 << self.N


def polarized_state(N: int) -> np.ndarray:
    """Fully polarized (all-up, zero-magnon) reference state."""
    psi = np.zeros(1 << N, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def magnon_state(N: int, site: int) -> np.ndarray:
    """One-magnon basis state: single down spin at ``site``."""
    if not 1 <= site <= N:
        raise ValueError(f"site {site} outside 1..{N}")
    psi = np.zeros(1 << N, dtype=np.complex128)
    psi[1 << (site - 1)] = 1.0
    return psi


def _popcounts(N: int) -> np.ndarray:
    idx = np.arange(1 << N, dtype=np.int64)
    counts = np.zeros(1 << N, dtype=np.int64)
    for i in range(N):
        counts += (idx >> i) & 1
    return counts


def build_hamiltonian(spec: ChainSpec, sparse: bool | None = None):
    """XX chain with transverse field, open boundaries.

    H = J * sum_i (sx_i sx_{i+1} + sy_i sy_{i+1}) + h * sum_i sx_i.
    Real-valued in the computational basis. Returns a dense ndarray for
    N <= DENSE_MAX_N unless ``sparse`` forces otherwise.
    """
    N, J, h = spec.N, spec.J, spec.h
    dim = 1 << N
    idx = np.arange(dim)

    rows, cols, vals = [], [], []
    # hopping: 2J between configs differing by one adjacent magnon move
    for i in range(N - 1):
        b1, b2 = 1 << i, 1 << (i + 1)
        differ = ((idx >> i) & 1) != ((idx >> (i + 1)) & 1)
        src = idx[differ]
        rows.append(src ^ (b1 | b2))
        cols.append(src)
        vals.append(np.full(src.size, 2.0 * J))
    # transverse field: flips any single bit
    if h != 0.0:
        for i in range(N):
            rows.append(idx ^ (1 << i))
            cols.append(idx)
            vals.append(np.full(dim, h))

    if rows:
        H = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
    else:
        H = sp.csr_matrix((dim, dim))

    if sparse is None:
        sparse = N > DENSE_MAX_N
    return H if sparse else H.toarray()


def magnon_projector(spec: ChainSpec, n: int):
    """Diagonal projector onto basis states with exactly n down spins."""
    if not 0 <= n <= spec.N:
        raise ValueError(f"magnon count {n} outside 0..{spec.N}")
    diag = (_popcounts(spec.N) == n).astype(np.float64)
    if spec.N > DENSE_MAX_N:
        return sp.diags(diag).tocsr()
    return np.diag(diag)


def _check_hermitian(H) -> None:
    if sp.issparse(H):
        dev = abs(H - H.conj().T).max()
    else:
        dev = np.abs(H - H.conj().T).max()
    if dev > _HERM_TOL:
        raise ValueError(f"operator not Hermitian: max deviation {dev:.3e}")


class Propagator:
    """Cached eigendecomposition of a Hermitian H; applies exp(-iHt).

    The Hamiltonians here are real symmetric in the computational basis,
    which halves the eigensolver cost.
    """

    def __init__(self, H):
        _check_hermitian(H)
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        if np.iscomplexobj(Hd) and np.abs(Hd.imag).max() > 1e-14:
            self._w, self._v = np.linalg.eigh(Hd)
        else:
            self._w, self._v = np.linalg.eigh(Hd.real if np.iscomplexobj(Hd) else Hd)
        self.dim = Hd.shape[0]

    def apply(self, state: np.ndarray, t: float) -> np.ndarray:
        """exp(-iHt) |state>; negative t evolves backward."""
        if state.shape[0] != self.dim:
            raise ValueError("state dimension does not match Hamiltonian")
        coeff = self._v.conj().T @ state
        return (self._v * np.exp(-1j * self._w * t)) @ coeff


def evolve(state: np.ndarray, H, t: float) -> np.ndarray:
    """exp(-iHt)|state> via eigendecomposition (small) or Krylov action (large).

    Both paths are retained so each can oracle-test the other; they agree
    to 1e-9 where both run.
    """
    dim = state.shape[0]
    if (sp.issparse(H) and H.shape[0] != dim) or (not sp.issparse(H) and H.shape[0] != dim):
        raise ValueError("dimension mismatch between state and Hamiltonian")
    if t == 0.0:
        return state.copy()
    if dim <= (1 << DENSE_MAX_N):
        return Propagator(H).apply(state, t)
    _check_hermitian(H)
    Hs = H if sp.issparse(H) else sp.csr_matrix(H)
    return expm_multiply(-1j * t * Hs, state.astype(np.complex128))


def apply_pauli(state: np.ndarray, site: int, axis: str) -> np.ndarray:
    """Single-site Pauli action on a state vector (site is 1-based)."""
    N = state.shape[0].bit_length() - 1
    if not 1 <= site <= N:
        raise ValueError(f"site {site} outside 1..{N}")
    idx = np.arange(state.shape[0])
    bit = (idx >> (site - 1)) & 1
    if axis == "x":
        return state[idx ^ (1 << (site - 1))]
    if axis == "y":
        # sy|up> = i|down>, sy|down> = -i|up>
        phase = np.where(bit == 1, 1j, -1j)
        return phase * state[idx ^ (1 << (site - 1))]
    if axis == "z":
        return state * (1.0 - 2.0 * bit)
    raise ValueError(f"unknown Pauli axis {axis!r}")


def encode(state: np.ndarray, s: int, theta: float) -> np.ndarray:
    """Local encoding exp(-i theta sy_s / 2)."""
    if abs(theta) >= np.pi:
        raise ValueError(f"|theta| must be < pi, got {theta}")
    if theta == 0.0:
        return state.copy()
    return np.cos(theta / 2) * state - 1j * np.sin(theta / 2) * apply_pauli(state, s, "y")
