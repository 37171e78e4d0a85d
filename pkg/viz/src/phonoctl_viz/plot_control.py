"""Render the synthesized control F, its cutoff F_N, and optionally the
frequency response from a design.csv."""

import argparse
import sys

from .figures import control_figure, save
from .io import SchemaError, read_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phonoctl-plot-control")
    parser.add_argument("control_csv", help="control.csv produced by 'phonoctl design'")
    parser.add_argument("--design", default=None, help="optional design.csv for a response panel")
    parser.add_argument("-o", "--out", default="control.png")
    args = parser.parse_args(argv)
    try:
        header, rows = read_csv(args.control_csv, "control")
        design = read_csv(args.design, "design") if args.design else None
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(control_figure(header, rows, design=design), args.out)
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
