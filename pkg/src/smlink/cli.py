"""Command-line entry point: sweeps, figure presets and the rotation optimizer.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
import os
import sys

from smlink.constellation import build_constellation
from smlink.engine import (
    ConfigurationError,
    load_config,
    parse_modulation,
    run_sweep,
    write_csv,
)
from smlink.presets import FIGURES, PUBLICATION_MAX_BITS, PUBLICATION_MIN_ERRORS, figure_configs
from smlink.stbc_sm import min_coding_gain_distance, optimize_rotation_angle

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smlink",
        description="Monte Carlo BER sweeps for SM / STBC-SM / V-BLAST links",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one sweep from a config file")
    run.add_argument("--config", required=True, help="flat key=value config file")
    run.add_argument("--out", default="ber.csv", help="output CSV path")
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--publication", action="store_true",
                     help="400-error / 1e9-bit stopping rule")

    fig = sub.add_parser("figure", help="run a canned figure preset")
    fig.add_argument("name", choices=FIGURES)
    fig.add_argument("--out", dest="out_dir", default=".",
                     help="directory receiving <name>.csv")
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--workers", type=int, default=1)
    fig.add_argument("--publication", action="store_true")

    opt = sub.add_parser("optimize-theta", help="grid-search the rotation angle")
    opt.add_argument("--n-t", type=int, required=True)
    opt.add_argument("--modulation", default="psk2")
    opt.add_argument("--grid-step", type=float, default=0.001)
    opt.add_argument("--theta", type=float, default=None,
                     help="skip the search and report the CGD at this angle")
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = str(args.seed)
    if args.publication:
        overrides["min_bit_errors"] = str(PUBLICATION_MIN_ERRORS)
        overrides["max_bits"] = str(PUBLICATION_MAX_BITS)
    cfg = load_config(args.config, overrides)
    records = run_sweep(cfg, workers=args.workers)
    write_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def _cmd_figure(args) -> int:
    configs = figure_configs(args.name, base_seed=args.seed,
                             publication=args.publication)
    os.makedirs(args.out_dir, exist_ok=True)
    records = []
    for cfg in configs:
        print(f"{args.name}: {cfg.scheme} {cfg.variant} L={cfg.L} "
              f"({len(cfg.snr_grid)} points)", file=sys.stderr)
        records.extend(run_sweep(cfg, workers=args.workers))
    out = os.path.join(args.out_dir, f"{args.name}.csv")
    write_csv(records, out)
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def _cmd_optimize_theta(args) -> int:
    try:
        kind, order = parse_modulation(args.modulation)
        const = build_constellation(kind, order)
    except ValueError as exc:
        raise ConfigurationError(str(exc))
    if args.theta is not None:
        cgd = min_coding_gain_distance(args.n_t, const, args.theta)
        print(f"theta_rad={args.theta:.6f}")
        print(f"min_cgd={cgd:.6e}")
        return EXIT_OK
    if args.grid_step > 0.01:
        raise ConfigurationError("grid step must be <= 0.01 rad")
    theta, cgd = optimize_rotation_angle(args.n_t, const, args.grid_step)
    print(f"theta_rad={theta:.6f}")
    print(f"min_cgd={cgd:.6e}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "figure":
            return _cmd_figure(args)
        return _cmd_optimize_theta(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
