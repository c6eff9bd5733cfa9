"""Command line entry point.

    drg run    --config experiment.json [--out path] [--norm ambient|riemannian]
    drg order  --config experiment.json [--out path] [--norm ...]
    drg drift  --config experiment.json [--out path]
    drg levels --config experiment.json [--out prefix]

Exit code 0 on success; any configuration or solver failure prints a
diagnostic on stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .errors import DomainError, NonConvergence


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drg",
        description="Energy-preserving integrators on Riemannian manifolds: "
                    "trajectory runs, order studies, energy-drift studies, "
                    "and level-curve trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("run", "integrate one trajectory and write it as CSV"),
            ("order", "error vs step size with a fitted convergence slope"),
            ("drift", "energy error over time for a list of methods"),
            ("levels", "sphere level-curve trajectories (coarse + fine)")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True,
                         help="path to a flat-key JSON experiment config")
        cmd.add_argument("--out", help="output CSV path (overrides config)")
        if name in ("run", "order"):
            cmd.add_argument("--norm", choices=harness.NORMS,
                             help="error norm (overrides config)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = harness.parse_config(args.config)
        if args.out:
            spec = replace(spec, out=args.out)
        if getattr(args, "norm", None):
            spec = replace(spec, norm=args.norm)
        if args.command == "run":
            record = harness.run(spec)
            print(f"run: {len(record.times) - 1} steps, "
                  f"max |dH| = {abs(record.energy_errors).max():.3e}"
                  + (f", wrote {spec.out}" if spec.out else ""))
        elif args.command == "order":
            err_a, err_r, slope = harness.order_study(spec)
            print(f"order: slope = {slope:.3f} ({spec.norm} norm)"
                  + (f", wrote {spec.out}" if spec.out else ""))
        elif args.command == "drift":
            times, columns, failures = harness.drift_study(spec)
            worst = {m: float(np.nanmax(np.abs(c)))
                     for m, c in columns.items()}
            print("drift: " + ", ".join(f"{m}: {w:.3e}"
                                        for m, w in worst.items())
                  + (f", wrote {spec.out}" if spec.out else ""))
            for mid, why in failures.items():
                print(f"note: method {mid!r} stopped early at {why}",
                      file=sys.stderr)
        else:
            results = harness.level_curve_study(spec)
            print(f"levels: {len(results)} initial condition(s)"
                  + (f", wrote {spec.out}_*.csv" if spec.out else ""))
    except (OSError, ValueError, RuntimeError, DomainError,
            NonConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
