"""Command-line front end.

Two subcommands sharing one JSON config format: ``design`` runs a single
optimization and stores the iteration trace plus the waveform, ``sweep``
runs a multi-point experiment. Exit codes: 0 on success, 1 on a config
problem, 2 when the run finished but some sweep points failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import ConfigError
from .experiments import EXPERIMENTS, desk_scale, load_config, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimowave",
        description="design and evaluate transmit code matrices for "
                    "colocated arrays under target uncertainty")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a JSON run description")
    common.add_argument("--desk-scale", action="store_true",
                        help="shrink arrays, code length, and trial count "
                             "for a fast smoke run")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--out", default=None,
                        help="override the config output path")

    sub.add_parser("design", parents=[common],
                   help="run one optimization (single_design configs)")
    sub.add_parser("sweep", parents=[common],
                   help="run a multi-point experiment")
    return parser


def _apply_overrides(config, args):
    if args.seed is not None:
        scenario = replace(config.scenario, seed=int(args.seed))
        config = replace(config, scenario=scenario, seed=int(args.seed))
    if args.out is not None:
        config = replace(config, output_path=args.out)
    if args.desk_scale:
        config = desk_scale(config)
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "design" and config.experiment != "single_design":
            raise ConfigError(
                f"'design' expects a single_design config, got "
                f"{config.experiment!r}")
        if args.command == "sweep" and config.experiment == "single_design":
            raise ConfigError(
                "'sweep' expects a multi-point experiment; use 'design' for "
                "single_design configs")
        config = _apply_overrides(config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outcome = run_experiment(config)
    print(f"wrote {outcome.csv_path} and {outcome.manifest_path}")
    if outcome.failures:
        print(f"warning: {outcome.failures} sweep point(s) failed; see "
              f"manifest for details", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
