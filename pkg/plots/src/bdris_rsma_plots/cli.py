"""Command-line figure rendering from experiment CSV outputs."""

from __future__ import annotations

import argparse
import sys

from .plotting import AGGREGATIONS, KINDS, PlotInputError, PlotSpec, \
    compute_series, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bdris-rsma-plots",
        description="Render figures from the simulator's CSV outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    plot = sub.add_parser("plot", help="render one figure from CSV inputs")
    plot.add_argument("--kind", required=True, choices=KINDS,
                      help="figure kind to render")
    plot.add_argument("--in", dest="inputs", nargs="+", required=True,
                      metavar="CSV", help="input CSV file(s)")
    plot.add_argument("--out", required=True, metavar="IMG",
                      help="output image path (extension picks the format)")
    plot.add_argument("--aggregate", default="mean", choices=AGGREGATIONS,
                      help="center statistic across seeds (default: mean)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(inputs=tuple(args.inputs), kind=args.kind,
                        out_path=args.out, aggregation=args.aggregate)
        series = compute_series(spec)
        out_path = render(spec)
    except (PlotInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    points = sum(len(s.x) for s in series)
    print(f"wrote {out_path} ({len(series)} series, {points} points, "
          f"from {len(spec.inputs)} file(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
