"""Command line for batch figure rendering from sweep CSV files."""

from __future__ import annotations

import argparse
import json
import sys

from .render import PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldbell-plots", description="Render coldbell sweep CSVs as images."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("csv", nargs="?", help="input sweep CSV (omit when using --spec)")
    p.add_argument("--spec", help="JSON plot spec file")
    p.add_argument("--kind", choices=("heatmap", "lines"), default="lines")
    p.add_argument("--value", help="heatmap color column")
    p.add_argument("--columns", help="comma-separated line columns")
    p.add_argument("--panels", action="store_true", help="one panel per column")
    p.add_argument("--x", default="t")
    p.add_argument("--y", default="eta")
    p.add_argument("--title")
    p.add_argument("--out", help="output image path (.png or .svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.spec:
            spec = PlotSpec.from_json(args.spec)
        else:
            if not args.csv or not args.out:
                raise ValueError("positional CSV and --out are required without --spec")
            spec = PlotSpec(
                input=args.csv,
                kind=args.kind,
                out=args.out,
                value=args.value,
                columns=tuple(args.columns.split(",")) if args.columns else (),
                panels=args.panels,
                x=args.x,
                y=args.y,
                title=args.title,
            )
        out = render(spec)
        print(f"wrote {out}")
        return 0
    except Exception as exc:
        print(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
