"""Command line entry point.

    plots order  --in study1.csv [study2.csv ...] --out figure.png
                 [--orders 1 2 4 6 8]
    plots drift  --in drift.csv --out figure.png
    plots sphere --in level_sia_0.csv level_ia_0.csv [...] --out figure.png

Exit code 0 on success; parse or rendering failures print a diagnostic on
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys

from .figures import DEFAULT_ORDERS, plot_drift, plot_order, plot_sphere


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from integrator benchmark CSVs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("order", "log-log error vs step size with reference slopes"),
            ("drift", "energy error over time, one series per method"),
            ("sphere", "3-D sphere trajectory overlay")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--in", dest="inputs", nargs="+", required=True,
                         metavar="CSV", help="input CSV file(s)")
        cmd.add_argument("--out", required=True, help="output image path")
        if name == "order":
            cmd.add_argument("--orders", type=int, nargs="+",
                             default=list(DEFAULT_ORDERS),
                             help="reference line orders "
                                  f"(default {' '.join(map(str, DEFAULT_ORDERS))})")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "order":
            plot_order(args.inputs, args.out, orders=tuple(args.orders))
        elif args.command == "drift":
            if len(args.inputs) != 1:
                raise ValueError("drift takes exactly one input CSV")
            plot_drift(args.inputs[0], args.out)
        else:
            plot_sphere(args.inputs, args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
