"""Acceptance suite: one test per criterion, ordered; `pytest -v` emits one
pass/fail line per criterion. Heavy N=12 state is shared module-wide."""

from __future__ import annotations

import time

import numpy as np
import pytest

from spinqfi.bessel import bessel_j
from spinqfi.chain import (
    ChainSpec,
    Propagator,
    build_hamiltonian,
    encode,
    magnon_state,
    polarized_state,
)
from spinqfi.decoder import OptimizerConfig, optimize_decoder
from spinqfi.freefermion import green_infinite, green_open_row, green_semi_infinite
from spinqfi.otoc import bloch_derivative_response, hierarchy_record
from spinqfi.perturbation import (
    DepletionCurve,
    collapse_check,
    fit_gamma_star,
    gamma_star_slope,
    golden_rule_p12,
    sector_weights,
    vacuum_channel_norm,
)
from spinqfi.qfi import (
    block_qfi,
    bloch_vector,
    make_tangent_pair,
    reduce_pair,
    site_qfi,
    site_qfi_profile,
    spectral_qfi,
)

from conftest import cached_propagator

GRID61 = np.linspace(0.0, 3.0, 61)


# ---------------------------------------------------------------- N=12 curves

_N12 = 12
_T21 = np.linspace(0.5, 1.5, 21)  # covers both the collapse and fit windows


@pytest.fixture(scope="module")
def n12_free_sums():
    """Free-chain site-QFI sums on the shared N=12 grid (denominators)."""
    prop0 = Propagator(build_hamiltonian(ChainSpec(N=_N12, s=1, h=0.0)))
    spec0 = ChainSpec(N=_N12, s=1, h=0.0)
    sums = np.array(
        [site_qfi_profile(make_tangent_pair(spec0, t, prop0)).sum() for t in _T21]
    )
    return sums


def _eta_curve(h: float, free_sums: np.ndarray) -> DepletionCurve:
    """Depletion curve at one field strength; propagator built and dropped
    here so only one 4096-dim eigenbasis is alive at a time."""
    spec = ChainSpec(N=_N12, s=1, h=h)
    prop = Propagator(build_hamiltonian(spec))
    eta = np.array(
        [
            1.0
            - site_qfi_profile(make_tangent_pair(spec, t, prop)).sum() / free_sums[i]
            for i, t in enumerate(_T21)
        ]
    )
    return DepletionCurve(tJ=_T21, eta=eta, h=h, N=_N12, s=1)


# ------------------------------------------------------------------- criteria


def test_c01_analytic_oracle_agreement():
    # h=0, N=10, s=1: ED F_j(t) vs |G_{j1}(t)|^2, max abs err < 1e-9, < 30 s
    t0 = time.perf_counter()
    N, s = 10, 1
    spec = ChainSpec(N=N, s=s, h=0.0)
    prop = cached_propagator(N, 0.0)
    worst = 0.0
    for t in GRID61:
        profile = site_qfi_profile(make_tangent_pair(spec, t, prop))
        analytic = np.abs(green_open_row(N, s, t)) ** 2
        worst = max(worst, float(np.abs(profile - analytic).max()))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-9
    assert elapsed < 30.0


def test_c02_sum_rule_and_conservation():
    # sum_j F_j(t; h=0) = 1 +- 1e-9 on the 61-point grid; full-chain block
    # QFI = 1 +- 1e-9 for h in {0, 0.1, 0.5}
    N = 10
    spec0 = ChainSpec(N=N, s=1, h=0.0)
    prop0 = cached_propagator(N, 0.0)
    for t in GRID61:
        total = site_qfi_profile(make_tangent_pair(spec0, t, prop0)).sum()
        assert abs(total - 1.0) < 1e-9
    full = list(range(1, N + 1))
    for h in (0.0, 0.1, 0.5):
        spec = ChainSpec(N=N, s=1, h=h)
        prop = cached_propagator(N, h)
        for t in GRID61[::10]:
            pair = make_tangent_pair(spec, t, prop)
            assert abs(block_qfi(pair, full) - 1.0) < 1e-9


def test_c03_bessel_identities():
    # boundary-source closed form vs image-source |G|^2 to 1e-12; propagator
    # unitarity to 1e-10 for the infinite and open kinds
    for t in GRID61[1:]:
        z = 4.0 * t
        for j in range(1, 31):
            closed = (j**2 / z**2) * (2.0 * bessel_j(j, z)) ** 2
            image = abs(green_semi_infinite(j, 1, t)) ** 2
            assert abs(closed - image) < 1e-12
    for t in (0.5, 1.5, 3.0):
        edge = int(np.ceil(4 * t)) + 40
        total_inf = sum(abs(green_infinite(n, t)) ** 2 for n in range(-edge, edge + 1))
        assert abs(total_inf - 1.0) < 1e-10
        total_open = float(np.sum(np.abs(green_open_row(40, 1, t)) ** 2))
        assert abs(total_open - 1.0) < 1e-10


def test_c04_hierarchy_chain():
    # (1-|r|^2) F_j <= |dr|^2 <= F_j <= C_sum / 4(1-|r|^2) with 1e-9 slack,
    # upper bound skipped where 1-|r|^2 < 1e-10; and 4|dr|^2 <= C_sum + 1e-9
    N = 10
    for h in (0.0, 0.1, 0.5):
        spec = ChainSpec(N=N, s=1, h=h)
        prop = cached_propagator(N, h)
        for t in GRID61:
            for j in range(1, N + 1):
                record, (lower, tangent, fj, upper) = hierarchy_record(
                    spec, j, t, prop
                )
                assert lower <= tangent + 1e-9
                assert tangent <= fj + 1e-9
                if upper is not None:
                    assert fj <= upper + 1e-9
                assert 4.0 * float(record.dr @ record.dr) <= record.C_sum + 1e-9


def test_c05_linear_response_identity():
    # commutator-based d_theta r vs theta finite difference (step 1e-4)
    N, s, step = 10, 1, 1e-4
    spots = [(t, j) for t, j in zip(np.linspace(0.3, 3.0, 10), [1, 3, 5, 7, 9, 10, 8, 6, 4, 2])]
    psi0 = polarized_state(N)
    for h in (0.0, 0.2, 0.5):
        spec = ChainSpec(N=N, s=s, h=h)
        prop = cached_propagator(N, h)
        for t, j in spots:
            dr = bloch_derivative_response(spec, j, t, prop)

            def r_of(theta: float) -> np.ndarray:
                from spinqfi.qfi import TangentPair

                evolved = prop.apply(encode(psi0, s, theta), t)
                carrier = TangentPair(psi=evolved, chi=evolved, tJ=t, spec=spec)
                return bloch_vector(reduce_pair(carrier, [j]).rho)

            fd = (r_of(step) - r_of(-step)) / (2.0 * step)
            assert np.abs(fd - dr).max() < 1e-6


def test_c06_decoder_saturation_free_chain():
    # h=0, N=10, s=1: F_dec >= F_block - 1e-4 on 13 t-points for w=4 and w=2
    t0 = time.perf_counter()
    N = 10
    spec = ChainSpec(N=N, s=1, h=0.0)
    prop = cached_propagator(N, 0.0)
    t_points = np.linspace(0.0, 3.0, 13)
    for sites in ([7, 8, 9, 10], [9, 10]):
        for t in t_points:
            pair = make_tangent_pair(spec, t, prop)
            blk = reduce_pair(pair, sites)
            f_block = spectral_qfi(blk)
            cfg = OptimizerConfig(
                steps=300,
                restarts=4,
                seed=0,
                target=f_block,
                target_slack=1e-6,
                patience=60,
            )
            _, f_dec, _ = optimize_decoder(blk, cfg)
            assert f_dec >= f_block - 1e-4
            assert f_dec <= f_block + 1e-9
    assert time.perf_counter() - t0 < 900.0


def test_c07_decoder_sandwich_with_field():
    # F_k <= F_dec <= F_block <= 1 (1e-9 slack) for h in {0.05,0.1,0.2,0.5};
    # at h=0.5 the decoded-vs-block gap exceeds 1e-3 at a late time
    N, sites, k = 10, [7, 8, 9, 10], 10
    t_points = np.linspace(0.5, 3.0, 6)
    late_gap = 0.0
    for h in (0.05, 0.1, 0.2, 0.5):
        spec = ChainSpec(N=N, s=1, h=h)
        prop = cached_propagator(N, h)
        for t in t_points:
            pair = make_tangent_pair(spec, t, prop)
            blk = reduce_pair(pair, sites)
            f_block = spectral_qfi(blk)
            cfg = OptimizerConfig(
                steps=300,
                restarts=2,
                seed=0,
                target=f_block,
                target_slack=1e-6,
                patience=30,
            )
            _, f_dec, _ = optimize_decoder(blk, cfg)
            f_k = site_qfi(pair, k)
            assert f_k <= f_dec + 1e-9
            assert f_dec <= f_block + 1e-9
            assert f_block <= 1.0 + 1e-9
            if h == 0.5 and t >= 2.0:
                late_gap = max(late_gap, f_block - f_dec)
    assert late_gap > 1e-3


def test_c08_depletion_collapse(n12_free_sums):
    # N=12: eta/h^2 pairwise relative deviation <= 15% over tJ in [0.5, 1.5]
    curves = [_eta_curve(h, n12_free_sums) for h in (0.05, 0.1, 0.2)]
    out = collapse_check(curves, window=(0.5, 1.5), threshold=0.15)
    assert out["passes"], out


def test_c09_rate_prefactor(n12_free_sums):
    # origin-fit slope of Gamma* against h^2/J^2 = 2.86 +- 0.3 at N=12,
    # six h values in [0.045, 0.22], windowed fit on tJ in [0.8, 1.2]
    t0 = time.perf_counter()
    h_values = np.array([0.045, 0.08, 0.115, 0.15, 0.185, 0.22])
    gammas = np.array(
        [
            fit_gamma_star(_eta_curve(h, n12_free_sums), window=(0.8, 1.2)).gamma_star
            for h in h_values
        ]
    )
    slope = gamma_star_slope(h_values, gammas, J=1.0)
    assert slope == pytest.approx(2.86, abs=0.3)
    assert time.perf_counter() - t0 < 3600.0


def test_c10_second_order_onset():
    # log-log exponents at tJ=1: eta vs h = 2.0 +- 0.1, and the two-magnon
    # weight of the evolved tangent vs h = 2.0 +- 0.15
    h_values = np.array([0.02, 0.04, 0.08, 0.16])
    spec0 = ChainSpec(N=_N12, s=1, h=0.0)
    prop0 = Propagator(build_hamiltonian(spec0))
    den = site_qfi_profile(make_tangent_pair(spec0, 1.0, prop0)).sum()
    etas, w2s = [], []
    for h in h_values:
        spec = ChainSpec(N=_N12, s=1, h=h)
        prop = Propagator(build_hamiltonian(spec))
        pair = make_tangent_pair(spec, 1.0, prop)
        etas.append(1.0 - site_qfi_profile(pair).sum() / den)
        w2s.append(sector_weights(pair.chi, _N12)[2])
    exp_eta = np.polyfit(np.log(h_values), np.log(etas), 1)[0]
    exp_w2 = np.polyfit(np.log(h_values), np.log(w2s), 1)[0]
    assert exp_eta == pytest.approx(2.0, abs=0.1)
    assert exp_w2 == pytest.approx(2.0, abs=0.15)


def test_c11_vacuum_channel():
    # quadrature norm vs (h^2/8J^2)(1 - cos 4Jt) at 20 spot values
    for t in np.linspace(0.15, 3.0, 20):
        analytic, numeric = vacuum_channel_norm(t, h=0.1, J=1.0, kind="infinite")
        assert abs(numeric - analytic) < 1e-10


def test_c12_golden_rule_oracle():
    # discrete golden rule vs full-Hilbert first-order Dyson quadrature at
    # N=8 to 1e-8; short-time P/t^2 constant to 1% for tJ <= 0.05
    from spinqfi.chain import apply_pauli

    N, J, h, s, tJ = 8, 1.0, 0.06, 3, 1.2
    spec = ChainSpec(N=N, J=J, h=h, s=s)
    prop0 = Propagator(build_hamiltonian(ChainSpec(N=N, J=J, h=0.0)))
    src = magnon_state(N, s)

    def v_total(state):
        return sum(apply_pauli(state, i, "x") for i in range(1, N + 1))

    n = 512
    u = np.linspace(0.0, tJ, n + 1)
    vals = np.stack(
        [prop0.apply(v_total(prop0.apply(src, ui)), tJ - ui) for ui in u]
    )
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4.0
    weights[2:-2:2] = 2.0
    psi1 = -1j * h * (tJ / n / 3.0) * (weights @ vals)
    oracle = sector_weights(psi1, N)[2]
    assert abs(golden_rule_p12(spec, tJ) - oracle) < 1e-8

    short = np.array([0.01, 0.02, 0.03, 0.04, 0.05])
    ratios = np.array([golden_rule_p12(spec, t) / t**2 for t in short])
    assert ratios.max() / ratios.min() - 1.0 < 0.01
