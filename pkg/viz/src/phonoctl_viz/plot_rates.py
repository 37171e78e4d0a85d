"""Render a rate-curve figure from a rates.csv file."""

import argparse
import sys

from .figures import rates_figure, save
from .io import SchemaError, read_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phonoctl-plot-rates")
    parser.add_argument("rates_csv", help="rates.csv produced by 'phonoctl rates'")
    parser.add_argument("-o", "--out", default="rates.png")
    args = parser.parse_args(argv)
    try:
        header, rows = read_csv(args.rates_csv, "rates")
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(rates_figure(header, rows), args.out)
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
