"""Render a Wigner or kinetic-field heatmap from a binary grid file."""

import argparse
import sys

from .figures import save, wigner_heatmap_figure
from .io import SchemaError, read_grid


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phonoctl-plot-wigner-heatmap")
    parser.add_argument("grid_bin", help=".bin grid file with its .json sidecar")
    parser.add_argument("-o", "--out", default="wigner.png")
    args = parser.parse_args(argv)
    try:
        values, meta = read_grid(args.grid_bin)
        fig = wigner_heatmap_figure(values, meta)
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save(fig, args.out)
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
