"""Command line: spinqfi-render --kind KIND --in CSV... --out PNG."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, RenderError, render
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinqfi-render",
        description="Regenerate figure layouts from engine CSV outputs",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument(
        "--in", dest="inputs", required=True, nargs="+", metavar="CSV"
    )
    parser.add_argument("--out", required=True, metavar="PNG")
    parser.add_argument(
        "--cy-scale",
        type=float,
        default=0.5,
        help="commutator scale factor in hierarchy/heatmap panels",
    )
    parser.add_argument(
        "--commutator-range",
        type=float,
        nargs=2,
        default=(0.0, 2.0),
        metavar=("LO", "HI"),
        help="colorbar range for the scaled commutator row",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec_kwargs = dict(
        kind=args.kind,
        inputs=tuple(args.inputs),
        out=args.out,
        cy_scale=args.cy_scale,
        commutator_range=tuple(args.commutator_range),
    )
    try:
        summary = render(FigureSpec(**spec_kwargs))
    except (RenderError, SchemaError, OSError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {summary['out']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
