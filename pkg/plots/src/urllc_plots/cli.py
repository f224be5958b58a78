"""Command-line interface: render experiment CSVs to figure files."""

from __future__ import annotations

import argparse
import sys

from .render import PlotsError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="urllc-plots",
        description="Render urllc-sched experiment CSVs as figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render CSVs to image files")
    p_render.add_argument("--in", dest="csv_dir", required=True,
                          help="directory holding the experiment CSVs")
    p_render.add_argument("--out", dest="out_dir", required=True,
                          help="directory for the rendered figures")
    p_render.add_argument("--format", choices=("svg", "png"), default="svg")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        written = render(args.csv_dir, args.out_dir, fmt=args.format)
    except PlotsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
