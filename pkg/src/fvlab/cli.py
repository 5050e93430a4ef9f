"""Command line entry point: ``fvlab run`` and ``fvlab list``."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import EXPERIMENTS, ExperimentConfig, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fvlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write CSV + JSON reports")
    run.add_argument("--experiment", help="experiment id (see `fvlab list`)")
    run.add_argument("--config", help="JSON config document; flags override its fields")
    run.add_argument("--levels", type=int, help="number of refinement levels (>= 3)")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output path; the JSON summary goes next to the CSV")

    sub.add_parser("list", help="list experiment ids")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in EXPERIMENTS:
            print(name)
        return 0

    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    for key in ("experiment", "levels", "seed", "out"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if "experiment" not in doc:
        print("fvlab: --experiment or a config with 'experiment' is required", file=sys.stderr)
        return 2
    doc.setdefault("out", f"fvlab_{doc['experiment']}.csv")
    try:
        config = ExperimentConfig(**doc)
        report = run_experiment(config)
    except ValueError as exc:
        print(f"fvlab: {exc}", file=sys.stderr)
        return 2
    for name, ok in report.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"wrote {config.out} ({report.wall_time:.2f}s)")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
