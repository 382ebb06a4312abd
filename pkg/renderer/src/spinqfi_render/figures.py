"""Figure assembly for the three layouts: collapse + rate fit, hierarchy
time series, and the spatiotemporal heatmap grid.

The renderer is read-only: every number drawn traces back to a CSV cell
(or to an arithmetic rescaling declared as a styling knob).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .schema import SchemaError, classify, field_strength, load

KINDS = ("collapse_rate", "hierarchy", "heatmap_grid")


class RenderError(ValueError):
    """Raised when inputs cannot be assembled into the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    out: str
    cy_scale: float = 0.5
    commutator_range: tuple[float, float] = (0.0, 2.0)
    panel_order: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise RenderError("no input CSVs given")


def _group_by_quantity(paths: tuple[str, ...]) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for p in paths:
        groups.setdefault(classify(p), []).append(p)
    return groups


def _single(groups: dict[str, list[str]], name: str) -> str:
    if name not in groups:
        raise RenderError(f"figure needs a {name} CSV and none was given")
    if len(groups[name]) != 1:
        raise RenderError(f"figure needs exactly one {name} CSV, got {len(groups[name])}")
    return groups[name][0]


def _by_field(paths: list[str], name: str) -> dict[float, pd.DataFrame]:
    out: dict[float, pd.DataFrame] = {}
    for p in paths:
        h = field_strength(p)
        if h is None:
            raise RenderError(
                f"{p}: cannot read field strength from filename "
                f"(expected {name}_h<value>.csv)"
            )
        out[h] = load(p, name)
    return out


def _ordered(h_values, spec: FigureSpec) -> list[float]:
    if spec.panel_order is None:
        return sorted(h_values)
    missing = [h for h in spec.panel_order if h not in h_values]
    if missing:
        raise RenderError(f"panel_order lists absent field strengths {missing}")
    return list(spec.panel_order)


def _render_collapse_rate(spec: FigureSpec) -> dict:
    groups = _group_by_quantity(spec.inputs)
    depletion = load(_single(groups, "depletion"), "depletion")
    rate = load(_single(groups, "rate_fit"), "rate_fit")

    fig, (ax_eta, ax_rate) = plt.subplots(1, 2, figsize=(9, 3.6))
    for h, sub in sorted(depletion.groupby("h")):
        if h == 0:
            raise RenderError("depletion rescaling is undefined at h = 0")
        ax_eta.plot(sub["tJ"], sub["eta"] / h**2, label=f"h = {h:g}")
    ax_eta.set_xlabel("tJ")
    ax_eta.set_ylabel(r"$\eta / h^2$")
    ax_eta.legend(frameon=False)

    x = rate["h"] ** 2
    ax_rate.scatter(x, rate["gamma_star"], zorder=3)
    slopes = rate["slope_global"].dropna().unique()
    slope = float(slopes[0]) if len(slopes) else float("nan")
    if np.isfinite(slope):
        xs = np.linspace(0.0, float(x.max()) * 1.05, 50)
        ax_rate.plot(xs, slope * xs, lw=1.0, label=f"slope {slope:.3g}")
        ax_rate.legend(frameon=False)
    ax_rate.set_xlabel(r"$h^2 / J^2$")
    ax_rate.set_ylabel(r"$\Gamma^*$")

    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return {"out": spec.out, "slope": slope, "n_curves": depletion["h"].nunique()}


def _render_hierarchy(spec: FigureSpec) -> dict:
    groups = _group_by_quantity(spec.inputs)
    if "hierarchy_series" not in groups:
        raise RenderError("figure needs at least one hierarchy_series CSV")
    frames = _by_field(groups["hierarchy_series"], "hierarchy_series")
    order = _ordered(frames.keys(), spec)

    fig, axes = plt.subplots(
        1, len(order), figsize=(3.2 * len(order), 3.2), squeeze=False, sharey=True
    )
    gaps: dict[float, float] = {}
    for ax, h in zip(axes[0], order):
        sub = frames[h].sort_values("tJ")
        ax.plot(sub["tJ"], sub["F_k"], ls=":", label=r"$F_k$")
        ax.plot(sub["tJ"], sub["F_dec"], ls="--", label=r"$F_{dec}$")
        ax.plot(sub["tJ"], sub["F_block"], ls="-", label=r"$F_{block}$")
        ax.fill_between(
            sub["tJ"],
            0.0,
            spec.cy_scale * sub["C_y"],
            alpha=0.25,
            label=rf"$C_y \times {spec.cy_scale:g}$",
        )
        gap = float((sub["F_dec"] - sub["F_block"]).abs().max())
        gaps[h] = gap
        ax.set_title(f"h = {h:g}")
        ax.set_xlabel("tJ")
        ax.annotate(
            rf"max $|F_{{dec}} - F_{{block}}|$ = {gap:.2e}",
            xy=(0.03, 0.97),
            xycoords="axes fraction",
            va="top",
            fontsize=8,
        )
    axes[0][0].set_ylabel("QFI")
    axes[0][-1].legend(frameon=False, fontsize=8)

    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return {"out": spec.out, "max_gap": gaps}


def _pivot(frame: pd.DataFrame, value: str) -> tuple[np.ndarray, list, list]:
    table = frame.pivot_table(index="j", columns="tJ", values=value, sort=True)
    return table.to_numpy(), list(table.index), list(table.columns)


def _render_heatmap_grid(spec: FigureSpec) -> dict:
    groups = _group_by_quantity(spec.inputs)
    for needed in ("otoc_map", "qfi_map", "decode_map"):
        if needed not in groups:
            raise RenderError(f"heatmap grid needs {needed} CSVs")
    otoc = _by_field(groups["otoc_map"], "otoc_map")
    qfi = _by_field(groups["qfi_map"], "qfi_map")
    decode = _by_field(groups["decode_map"], "decode_map")
    common = set(otoc) & set(qfi) & set(decode)
    if not common:
        raise RenderError("no field strength has all three quantities")
    order = _ordered(common, spec)

    # shared per-row color ranges; the scaled commutator row is fixed by knob
    vmax_f = max(float(qfi[h]["F_j"].max()) for h in order)
    dec_max = {
        w: max(
            float(decode[h].loc[decode[h]["w"] == w, "F_dec"].max(skipna=True))
            for h in order
        )
        for w in (2, 4)
    }

    fig, axes = plt.subplots(
        4, len(order), figsize=(3.0 * len(order), 8.0), squeeze=False
    )
    row_ranges = {
        "C_y_scaled": spec.commutator_range,
        "F_j": (0.0, vmax_f),
        "F_dec_w2": (0.0, dec_max[2]),
        "F_dec_w4": (0.0, dec_max[4]),
    }
    for col, h in enumerate(order):
        cy, js, ts = _pivot(otoc[h], "C_y")
        extent = (min(ts), max(ts), min(js), max(js))
        axes[0][col].imshow(
            spec.cy_scale * cy,
            origin="lower",
            aspect="auto",
            extent=extent,
            vmin=spec.commutator_range[0],
            vmax=spec.commutator_range[1],
        )
        fj, _, _ = _pivot(qfi[h], "F_j")
        axes[1][col].imshow(
            fj, origin="lower", aspect="auto", extent=extent, vmin=0.0, vmax=vmax_f
        )
        for row, w in ((2, 2), (3, 4)):
            sub = decode[h][decode[h]["w"] == w].sort_values("tJ")
            if sub.empty:
                raise RenderError(f"decode_map for h={h:g} has no w={w} rows")
            strip = sub["F_dec"].to_numpy()[None, :]
            axes[row][col].imshow(
                strip,
                origin="lower",
                aspect="auto",
                extent=(float(sub["tJ"].min()), float(sub["tJ"].max()), 0, 1),
                vmin=0.0,
                vmax=dec_max[w],
            )
            axes[row][col].set_yticks([])
        axes[0][col].set_title(f"h = {h:g}")
        axes[3][col].set_xlabel("tJ")
    for row, label in enumerate(
        (rf"$C_y \times {spec.cy_scale:g}$", r"$F_j$", r"$F_{dec}(w{=}2)$", r"$F_{dec}(w{=}4)$")
    ):
        axes[row][0].set_ylabel(label)

    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return {"out": spec.out, "row_ranges": row_ranges, "columns": order}


def render(spec: FigureSpec) -> dict:
    """Write the figure and return a summary of what was drawn."""
    Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "collapse_rate":
        return _render_collapse_rate(spec)
    if spec.kind == "hierarchy":
        return _render_hierarchy(spec)
    return _render_heatmap_grid(spec)
