"""
Command for the bundled experiments.
"""

import argparse
import logging

from ocpad.cli.common import common_parser, jobs, resolve_config
from ocpad.services.experiment import ExperimentManager

logger = logging.getLogger(__name__)

EXPERIMENTS = ["architectures", "c-sweep", "fusion", "benchmark"]


def experiment(args: argparse.Namespace) -> int:
    config = resolve_config(args, output_dir=args.out, data_dir=args.data, epochs=args.epochs)
    manager = ExperimentManager(config, jobs=jobs(args))
    summary = manager.run(args.name)
    for run in summary.runs:
        report = run.report
        print(f"{run.name:<28} D-EER {100 * report.d_eer:6.2f}%  pAUC@20 {report.pauc20:6.2f}%  "
              f"APCER@0.2% {100 * report.apcer_at(0.002):6.2f}%")
    if summary.fusion is not None:
        for entry in summary.fusion.entries:
            print(f"fusion w={entry.weight:<4g}               D-EER {100 * entry.report.d_eer:6.2f}%  "
                  f"pAUC@20 {entry.report.pauc20:6.2f}%")
    overlap = summary.overlap
    if overlap is not None:
        first, second = overlap.sources
        share = "n/a" if overlap.first_shared is None else f"{100 * overlap.first_shared:.0f}%"
        print(f"missed at BPCER {100 * overlap.target_bpcer:g}%: {first} {len(overlap.missed[first])}, "
              f"{second} {len(overlap.missed[second])}, shared {len(overlap.shared)} "
              f"({share} of {first} misses)")
    print(f"artifacts in {manager.out_dir}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("experiment", parents=[common_parser()], help="run a bundled experiment")
    parser.add_argument("name", choices=EXPERIMENTS)
    parser.add_argument("--data", help="directory written by gen; generated in memory when absent")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--out", help="output directory (default: output_dir from the config)")
    parser.set_defaults(handler=experiment)
