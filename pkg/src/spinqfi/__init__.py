"""Spin-chain quantum metrology engine.

Exact-diagonalization transport of single-site quantum Fisher information
in an XX chain with a transverse (U(1)-breaking) field, free-fermion
analytic baselines, OTOC causal bounds, a variational sweep decoder, and
perturbative depletion-rate diagnostics.
"""

__version__ = "0.1.0"

from .chain import ChainSpec, Propagator, build_hamiltonian, evolve
from .qfi import DensityBlock, TangentPair, make_tangent_pair, reduce_pair

__all__ = [
    "ChainSpec",
    "Propagator",
    "build_hamiltonian",
    "evolve",
    "TangentPair",
    "DensityBlock",
    "make_tangent_pair",
    "reduce_pair",
    "__version__",
]
