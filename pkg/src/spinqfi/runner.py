"""Experiment orchestration: work-unit expansion, per-field jobs, CSV and
manifest emission.

Each (N, h) curve is an independent job sharing one eigendecomposition;
result rows are sorted before writing so collection order never matters.
Identical config and seed give byte-identical CSV numeric content.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .chain import ChainSpec, Propagator, build_hamiltonian
from .config import ConfigError, RunConfig
from .decoder import optimize_decoder
from .freefermion import green_open_row
from .otoc import squared_commutator
from .perturbation import DepletionCurve, fit_gamma_star, gamma_star_slope
from .qfi import make_tangent_pair, reduce_pair, site_qfi, site_qfi_profile, spectral_qfi

GRID_LIMIT = 10**6

SCHEMAS = {
    "qfi_map": ("tJ", "j", "F_j"),
    "otoc_map": ("tJ", "j", "C_x", "C_y", "C_z", "C_sum"),
    "decode_map": ("tJ", "w", "F_dec", "F_block", "restart_best_id"),
    "hierarchy_series": ("tJ", "F_k", "F_dec", "F_block", "C_y"),
    "depletion": ("tJ", "h", "eta"),
    "rate_fit": ("h", "gamma_star", "window_lo", "window_hi", "slope_global"),
    "analytic_check": ("tJ", "max_abs_err"),
}

# experiments whose rows from all h jobs merge into a single file
_MERGED = {"depletion", "rate_fit", "analytic_check"}


def grid_product(config: RunConfig) -> list[dict]:
    """Expand (h x t x width) into pure-input work-unit descriptions."""
    t_values = config.time_grid.values()
    widths = config.block.w if config.block is not None else (None,)
    units = []
    for h in config.h_values:
        for t in t_values:
            for w in widths:
                unit = {"h": h, "tJ": float(t)}
                if w is not None:
                    unit["w"] = w
                units.append(unit)
                if len(units) > GRID_LIMIT:
                    raise ConfigError(f"work-unit count exceeds {GRID_LIMIT}")
    return units


def _unit_seed(config: RunConfig, h_index: int, unit_index: int) -> int:
    base = 0 if config.seed is None else config.seed
    seq = np.random.SeedSequence(entropy=base, spawn_key=(h_index, unit_index))
    return int(seq.generate_state(1)[0])  # deterministic, distinct per unit


def _job_rows(config: RunConfig, h_index: int) -> dict[str, list[tuple]]:
    """All result rows for one field strength."""
    h = config.h_values[h_index]
    spec = ChainSpec(N=config.N, J=config.J, h=h, s=config.s)
    prop = Propagator(build_hamiltonian(spec))
    t_values = config.time_grid.values()
    exp = config.experiment
    rows: list[tuple] = []

    if exp == "qfi_map":
        for t in t_values:
            pair = make_tangent_pair(spec, t, prop)
            for j, f in enumerate(site_qfi_profile(pair), start=1):
                rows.append((t, j, f))

    elif exp == "otoc_map":
        for t in t_values:
            for j in range(1, config.N + 1):
                cs = [squared_commutator(spec, a, j, t, prop) for a in "xyz"]
                rows.append((t, j, cs[0], cs[1], cs[2], sum(cs)))

    elif exp == "decode_map":
        unit = 0
        for t in t_values:
            pair = make_tangent_pair(spec, t, prop)
            for w in config.block.w:
                blk = reduce_pair(pair, config.block.sites(w))
                f_block = spectral_qfi(blk)
                cfg = replace(
                    config.optimizer,
                    seed=_unit_seed(config, h_index, unit),
                    target=f_block,
                )
                _, f_dec, trace = optimize_decoder(blk, cfg)
                rows.append((t, w, f_dec, f_block, trace.best_restart))
                unit += 1

    elif exp == "hierarchy_series":
        w = config.block.w[0]
        sites = config.block.sites(w)
        k = config.block.k
        for unit, t in enumerate(t_values):
            pair = make_tangent_pair(spec, t, prop)
            blk = reduce_pair(pair, sites)
            f_block = spectral_qfi(blk)
            cfg = replace(
                config.optimizer,
                seed=_unit_seed(config, h_index, unit),
                target=f_block,
            )
            _, f_dec, _ = optimize_decoder(blk, cfg)
            f_k = site_qfi(pair, k)
            c_y = squared_commutator(spec, "y", k, t, prop)
            rows.append((t, f_k, f_dec, f_block, c_y))

    elif exp == "depletion":
        free_spec = replace(spec, h=0.0)
        free_prop = Propagator(build_hamiltonian(free_spec)) if h != 0.0 else prop
        for t in t_values:
            num = site_qfi_profile(make_tangent_pair(spec, t, prop)).sum()
            den = site_qfi_profile(make_tangent_pair(free_spec, t, free_prop)).sum()
            rows.append((t, h, 1.0 - num / den))

    elif exp == "rate_fit":
        free_spec = replace(spec, h=0.0)
        free_prop = Propagator(build_hamiltonian(free_spec)) if h != 0.0 else prop
        eta = []
        for t in t_values:
            num = site_qfi_profile(make_tangent_pair(spec, t, prop)).sum()
            den = site_qfi_profile(make_tangent_pair(free_spec, t, free_prop)).sum()
            eta.append(1.0 - num / den)
        curve = DepletionCurve(
            tJ=np.asarray(t_values), eta=np.asarray(eta), h=h, N=config.N, s=config.s
        )
        fit = fit_gamma_star(curve, config.fit_window)
        # slope_global is filled in after all h jobs complete
        rows.append((h, fit.gamma_star, config.fit_window[0], config.fit_window[1], None))

    elif exp == "analytic_check":
        if h != 0.0:
            raise ConfigError("analytic_check requires h = 0")
        for t in t_values:
            pair = make_tangent_pair(spec, t, prop)
            f_ed = site_qfi_profile(pair)
            f_an = np.abs(green_open_row(config.N, config.s, t, config.J)) ** 2
            rows.append((t, float(np.abs(f_ed - f_an).max())))

    else:
        raise ConfigError(f"unknown experiment {exp!r}")

    return {exp: rows}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in sorted(rows, key=lambda r: tuple(-1e300 if v is None else v for v in r)):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run(config: RunConfig, out_dir: str | Path | None = None) -> int:
    """Execute the experiment; returns the process exit code (0/2)."""
    out = Path(out_dir if out_dir is not None else config.output)
    units = grid_product(config)

    results: dict[int, dict[str, list[tuple]]] = {}
    timings: dict[str, float] = {}
    failures: list[dict] = []

    def record(h_index: int, payload, elapsed: float, err: Exception | None) -> None:
        h = config.h_values[h_index]
        timings[f"h={h}"] = elapsed
        if err is not None:
            failures.append({"h": h, "error": f"{type(err).__name__}: {err}"})
        else:
            results[h_index] = payload

    if config.workers > 1 and len(config.h_values) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {
                i: pool.submit(_job_rows, config, i)
                for i in range(len(config.h_values))
            }
            for i, fut in futures.items():
                t0 = time.perf_counter()
                try:
                    record(i, fut.result(), time.perf_counter() - t0, None)
                except Exception as exc:  # crash isolation per job
                    record(i, None, time.perf_counter() - t0, exc)
    else:
        for i in range(len(config.h_values)):
            t0 = time.perf_counter()
            try:
                record(i, _job_rows(config, i), time.perf_counter() - t0, None)
            except Exception as exc:
                record(i, None, time.perf_counter() - t0, exc)

    out.mkdir(parents=True, exist_ok=True)
    exp = config.experiment
    header = SCHEMAS[exp]

    if exp in _MERGED:
        merged: list[tuple] = []
        for i in sorted(results):
            merged.extend(results[i][exp])
        if exp == "rate_fit" and merged:
            hs = np.array([r[0] for r in merged])
            gs = np.array([r[1] for r in merged])
            slope = gamma_star_slope(hs, gs, config.J)
            merged = [(r[0], r[1], r[2], r[3], slope) for r in merged]
        _write_csv(out / f"{exp}.csv", header, merged)
    else:
        for i in sorted(results):
            h = config.h_values[i]
            _write_csv(out / f"{exp}_h{h:g}.csv", header, results[i][exp])

    manifest = {
        "experiment": exp,
        "engine_version": __version__,
        "seed": config.seed,
        "config": {
            "N": config.N,
            "J": config.J,
            "h": list(config.h_values),
            "s": config.s,
            "time_grid": [config.time_grid.start, config.time_grid.stop, config.time_grid.count],
            "block": None
            if config.block is None
            else {"w": list(config.block.w), "k": config.block.k},
            "optimizer": dict(config.optimizer.__dict__),
            "workers": config.workers,
            "fit_window": list(config.fit_window),
        },
        "work_units": len(units),
        "timings_s": timings,
        "failures": failures,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)

    return 2 if failures else 0
