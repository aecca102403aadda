"""`plot <csv> --x {snr_db|L} --out <path>` entry point."""

import argparse
import sys

from plotviz import PlotError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render a BER sweep CSV to a log-scale figure")
    parser.add_argument("csv", help="sweep CSV file")
    parser.add_argument("--x", choices=("snr_db", "L"), default="snr_db",
                        help="x axis column")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        count = render(args.csv, args.x, args.out)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out} ({count} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
