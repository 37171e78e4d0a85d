"""Render simulated-vs-closed-form comparison panels from compare.csv and
optionally fractions.csv."""

import argparse
import sys

from .figures import comparison_figure, save
from .io import SchemaError, read_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phonoctl-plot-comparison")
    parser.add_argument("compare_csv", help="compare.csv produced by 'phonoctl compare'")
    parser.add_argument("--fractions", default=None, help="optional fractions.csv panel")
    parser.add_argument("-o", "--out", default="comparison.png")
    args = parser.parse_args(argv)
    try:
        header, rows = read_csv(args.compare_csv, "compare")
        fractions = read_csv(args.fractions, "fractions") if args.fractions else None
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(comparison_figure(header, rows, fractions=fractions), args.out)
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
