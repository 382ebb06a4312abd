"""Command-line entry point: one subcommand per experiment.

Usage: spinqfi EXPERIMENT --config PATH [--out DIR] [--workers N] [--seed S]
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .runner import grid_product, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinqfi",
        description="Spin-chain QFI transport, OTOC bounds, and decoder sweeps",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if config.experiment != args.experiment:
            raise ConfigError(
                f"config declares experiment {config.experiment!r}, "
                f"subcommand is {args.experiment!r}"
            )
        overrides = {}
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            config = dataclasses.replace(config, **overrides)
        units = grid_product(config)
        print(f"{config.experiment}: {len(units)} work units", file=sys.stderr)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    code = run(config, out_dir=args.out)
    if code != 0:
        print("numerical failure in one or more work units", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
