"""Run configuration: strict YAML schema for the experiment harness.

Unknown keys are errors, not warnings; the config file is the single
source of truth (CLI flags may override out/workers/seed only).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .decoder import OptimizerConfig

EXPERIMENTS = (
    "qfi_map",
    "otoc_map",
    "decode_map",
    "hierarchy_series",
    "depletion",
    "rate_fit",
    "analytic_check",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        if self.count < 1:
            raise ConfigError(f"time grid count must be >= 1, got {self.count}")
        grid = np.linspace(self.start, self.stop, self.count)
        if self.count > 1 and not np.all(np.diff(grid) > 0):
            raise ConfigError("time grid must be strictly increasing")
        return grid


@dataclass(frozen=True)
class BlockDef:
    w: tuple[int, ...]
    k: int

    def sites(self, width: int) -> list[int]:
        return list(range(self.k - width + 1, self.k + 1))


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    N: int
    J: float
    h_values: tuple[float, ...]
    s: int
    time_grid: TimeGrid
    block: BlockDef | None = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int | None = None
    output: str = "out"
    workers: int = 1
    fit_window: tuple[float, float] = (0.8, 1.2)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.h_values:
            raise ConfigError("empty h list")
        needs_decoder = self.experiment in ("decode_map", "hierarchy_series")
        if needs_decoder:
            if self.block is None:
                raise ConfigError(f"{self.experiment} requires a block definition")
            if self.seed is None:
                raise ConfigError(
                    f"{self.experiment} runs the decoder and requires a seed"
                )
        if self.block is not None:
            for width in self.block.w:
                lo = self.block.k - width + 1
                if width < 1 or lo < 1 or self.block.k > self.N:
                    raise ConfigError(
                        f"block w={width}, k={self.block.k} outside chain 1..{self.N}"
                    )


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _require_keys(
        raw,
        {
            "experiment",
            "chain",
            "time_grid",
            "block",
            "optimizer",
            "seed",
            "output",
            "workers",
            "fit_window",
        },
        "config",
    )
    for key in ("experiment", "chain", "time_grid"):
        if key not in raw:
            raise ConfigError(f"missing required config key {key!r}")

    chain = raw["chain"]
    _require_keys(chain, {"N", "J", "h", "s"}, "chain")
    h_raw = chain.get("h", 0.0)
    h_values = tuple(float(x) for x in (h_raw if isinstance(h_raw, list) else [h_raw]))

    tg = raw["time_grid"]
    _require_keys(tg, {"start", "stop", "count"}, "time_grid")
    time_grid = TimeGrid(float(tg["start"]), float(tg["stop"]), int(tg["count"]))

    block = None
    if raw.get("block") is not None:
        b = raw["block"]
        _require_keys(b, {"w", "k"}, "block")
        w_raw = b["w"]
        widths = tuple(int(x) for x in (w_raw if isinstance(w_raw, list) else [w_raw]))
        block = BlockDef(w=widths, k=int(b["k"]))

    optimizer = OptimizerConfig()
    if raw.get("optimizer") is not None:
        opt = dict(raw["optimizer"])
        allowed = set(OptimizerConfig.__dataclass_fields__)
        _require_keys(opt, allowed, "optimizer")
        optimizer = OptimizerConfig(**opt)

    fit_window = tuple(raw.get("fit_window", (0.8, 1.2)))
    if len(fit_window) != 2:
        raise ConfigError("fit_window must be [lo, hi]")

    return RunConfig(
        experiment=str(raw["experiment"]),
        N=int(chain.get("N", 0)),
        J=float(chain.get("J", 1.0)),
        h_values=h_values,
        s=int(chain.get("s", 1)),
        time_grid=time_grid,
        block=block,
        optimizer=optimizer,
        seed=None if raw.get("seed") is None else int(raw["seed"]),
        output=str(raw.get("output", "out")),
        workers=int(raw.get("workers", 1)),
        fit_window=(float(fit_window[0]), float(fit_window[1])),
    )


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return config_from_dict(raw)
