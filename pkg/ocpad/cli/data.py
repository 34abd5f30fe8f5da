"""
Command for synthetic data generation.
"""

import argparse
import logging

from ocpad.cli.common import common_parser, jobs, resolve_config
from ocpad.services.dataset import write_dataset

logger = logging.getLogger(__name__)


def gen(args: argparse.Namespace) -> int:
    """
    Generate, split and write the containers plus manifest.json.
    """
    config = resolve_config(args, data_dir=args.out)
    manifest = write_dataset(config.dataset(), config.data_dir, config.modalities, jobs=jobs(args))
    for split, counts in manifest.counts.items():
        print(f"{split}: {manifest.subjects[split]} subjects, "
              + ", ".join(f"{name}={count}" for name, count in counts.items()))
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", parents=[common_parser()], help="generate the synthetic database")
    parser.add_argument("--out", help="output directory (default: data_dir from the config)")
    parser.set_defaults(handler=gen)
