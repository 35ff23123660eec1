"""Command-line interface: single-point runs, sweeps, and the oracle check.

Every subcommand takes a config file plus overriding flags; results are
written to the configured output directory as CSV tables, per-run epoch
logs and re-scorable solution archives.
"""

import argparse
import sys
from dataclasses import replace

from . import experiments as ex
from .sysmodel import MagnitudeMode


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bdris-rsma",
        description="Meta-learned sum-rate optimization for a BD-RIS-assisted "
                    "two-user uplink, with diagonal, random and exhaustive "
                    "reference schemes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schemes=True):
        p.add_argument("config", help="experiment config file (key = value lines)")
        p.add_argument("--seeds", help="comma-separated seed list overriding the config")
        p.add_argument("--out-dir", help="output directory overriding the config")
        if schemes:
            p.add_argument("--scheme", action="append",
                           choices=list(ex.KNOWN_SCHEMES),
                           help="restrict to this scheme (repeatable)")
        p.add_argument("--strict-paper", action="store_true",
                       help="literal-update mode: binary penalty switches and "
                            "unit-modulus block entries")

    run_p = sub.add_parser("run", help="run the config's single scenario point")
    common(run_p)

    sweep_p = sub.add_parser("sweep", help="sweep element or antenna counts")
    common(sweep_p)
    sweep_p.add_argument("--vary", required=True, choices=["M", "N"],
                         help="swept dimension: M (elements) or N (antennas)")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values for the swept dimension")

    oracle_p = sub.add_parser(
        "oracle", help="compare the diagonal meta-optimizer against the "
                       "exhaustive phase grid (tiny scenarios only)")
    common(oracle_p, schemes=False)
    return parser


def apply_overrides(config, args):
    if args.seeds:
        config = replace(config, seeds=tuple(int(s) for s in args.seeds.split(",")))
    if getattr(args, "scheme", None):
        config = replace(config, schemes=tuple(dict.fromkeys(args.scheme)))
    if args.out_dir:
        config = replace(config, out_dir=args.out_dir)
    if args.strict_paper:
        config = replace(config, magnitude_mode=MagnitudeMode.UNIT,
                         meta=replace(config.meta, strict_paper=True))
    return config


def _print_row(row):
    print(f"{row.run_id}: best_sum_rate={row.best_sum_rate:.4f} "
          f"rate_ue1={row.rate_ue1:.4f} rate_ue2={row.rate_ue2:.4f} "
          f"status={row.status} wall={row.wall_time_seconds:.1f}s", flush=True)


def _run_and_emit(config, vary=None, values=None):
    sweep = ex.run_sweep(config, vary=vary, values=values, progress=_print_row)
    paths = ex.emit_results(sweep, config.out_dir, config)
    print(f"wrote {paths[0]} ({len(sweep.rows)} rows)")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = apply_overrides(ex.load_config(args.config), args)
        if args.command == "run":
            return _run_and_emit(config)
        if args.command == "sweep":
            values = [int(v) for v in args.values.split(",") if v.strip()]
            return _run_and_emit(config, vary=args.vary, values=values)
        if args.command == "oracle":
            rows = ex.run_oracle_comparison(config)
            for row in rows:
                print(f"seed {row.seed}: meta={row.meta_sum_rate:.4f} "
                      f"oracle={row.oracle_sum_rate:.4f} ratio={row.ratio:.3f} "
                      f"({row.oracle_evaluations} oracle evaluations)", flush=True)
            reached = sum(1 for row in rows if row.ratio >= 0.9)
            print(f"{reached}/{len(rows)} seeds reached 90% of the oracle")
            path = ex.emit_oracle_results(rows, config.out_dir)
            print(f"wrote {path}")
            return 0
        raise AssertionError(f"unhandled command {args.command}")
    except (ex.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
