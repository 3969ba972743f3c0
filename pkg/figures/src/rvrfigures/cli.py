"""Command-line entry point: render one figure from one engine CSV."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvrfigures",
        description="Render figures from rvrsim CSV outputs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="in_path", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.kind, args.in_path, args.out)
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
