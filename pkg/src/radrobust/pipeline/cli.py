"""Command-line entry point.

    radrobust <subcommand> --config <path> [--jobs N] [--seed S] [--out DIR]

Subcommands run one stage each against the shared cache (gen-synth, extract,
profile, select, evaluate, report) or the whole workflow (run). Exit codes:
0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from ..cohort_io import CohortIOError
from .runner import ConfigError, DataError, RunConfig, Runner

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

SUBCOMMANDS = ("gen-synth", "extract", "profile", "select", "evaluate", "report", "run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radrobust",
        description="Robustness-aware radiomics pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default="out", help="output/cache directory")
        p.add_argument("--jobs", type=int, default=None, help="parallel cells")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(args) -> RunConfig:
    config = RunConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args)
        runner = Runner(config, args.out)
        if args.command == "gen-synth":
            for path in runner.gen_synth():
                print(path)
        elif args.command == "extract":
            runner.run_extract()
            print("extraction cached under", runner.cache.root / "extract")
        elif args.command == "profile":
            runner.manifests()
            runner.run_profile(compute_upstream=False)
            print("robustness profiles cached under", runner.cache.root / "profile")
        elif args.command == "select":
            runner.manifests()
            for cell in config.cells():
                runner.evaluate_cell(cell, compute_upstream=False)
            print("selections cached under", runner.cache.root / "select")
        elif args.command == "evaluate":
            report = runner.run(compute_upstream=False)
            print(report)
        elif args.command == "report":
            report = runner.run_report()
            print(report)
        elif args.command == "run":
            report = runner.run()
            print(report)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, CohortIOError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
