"""Command line: plots <kind> --in <paths> --out <png>."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, ParseError, PlotJob, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from vortexlab results files."
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV or snapshot path(s)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--norm", default=None,
                        help="norm kind column to plot (default: first present)")
    args = parser.parse_args(argv)
    job = PlotJob(kind=args.kind, inputs=args.inputs, output=args.out,
                  norm_kind=args.norm)
    try:
        summary = render(job)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({summary})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
