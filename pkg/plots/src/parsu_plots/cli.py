"""Standalone figure-rendering entry points."""

from __future__ import annotations

import argparse
import sys

from .figures import SchemaError, plot_convergence, plot_speedup


def main_convergence(argv=None) -> int:
    p = argparse.ArgumentParser(
        description="Render objective-vs-time convergence curves from a "
                    "benchmark run CSV (one series per mode/thread count)")
    p.add_argument("--input", required=True, help="run CSV path")
    p.add_argument("--output", required=True, help="image path (.png/.svg)")
    p.add_argument("--log-y", action="store_true", help="log-scale objective")
    args = p.parse_args(argv)
    try:
        info = plot_convergence(args.input, args.output, log_y=args.log_y)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.path} ({len(info.series)} series)")
    return 0


def main_speedup(argv=None) -> int:
    p = argparse.ArgumentParser(
        description="Render speedup-vs-threads charts from a speedup table CSV")
    p.add_argument("--input", required=True, help="speedup CSV path")
    p.add_argument("--output", required=True, help="image path (.png/.svg)")
    p.add_argument("--updates-only", action="store_true",
                   help="plot the updates-only speedup column")
    args = p.parse_args(argv)
    try:
        info = plot_speedup(args.input, args.output,
                            column="updates_speedup" if args.updates_only
                            else "speedup")
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.path} ({len(info.series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main_convergence())
