from __future__ import annotations

import pytest

from spinqfi.chain import ChainSpec, Propagator, build_hamiltonian

_PROP_CACHE: dict[tuple, Propagator] = {}


def cached_propagator(N: int, h: float = 0.0, J: float = 1.0) -> Propagator:
    key = (N, h, J)
    if key not in _PROP_CACHE:
        spec = ChainSpec(N=N, J=J, h=h, s=1)
        _PROP_CACHE[key] = Propagator(build_hamiltonian(spec))
    return _PROP_CACHE[key]


@pytest.fixture
def propagator_for():
    return cached_propagator
