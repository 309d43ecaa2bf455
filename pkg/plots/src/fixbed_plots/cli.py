"""Command line: fixbed-plot --spec <json> --out <image>."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureInputError, FigureSpec, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fixbed-plot",
        description="Render a figure from fixbed result tables")
    parser.add_argument("--spec", required=True, help="figure spec (JSON)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_file(args.spec)
        info = render(spec, args.out)
    except (FigureInputError, OSError, KeyError, ValueError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info['path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
