"""
Flags and helpers shared by every command.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ocpad.config import load_config, settings
from ocpad.errors import DataContractError, UsageError
from ocpad.schemas.dataset import MODALITY_CHANNELS, Modality
from ocpad.schemas.experiment import ExperimentConfig
from ocpad.services.dataset import container_name

logger = logging.getLogger(__name__)


def common_parser() -> argparse.ArgumentParser:
    """
    Global flags, accepted before or after the command name. SUPPRESS keeps a
    sub-command's missing flag from overwriting one given before it.
    """
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="master seed (falls back to OC_SEED, then the config file)")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="worker cap for generation and scoring")
    parser.add_argument("--config", default=argparse.SUPPRESS, help="flat key = value config file")
    parser.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS, help="debug logging")
    return parser


def jobs(args: argparse.Namespace) -> int:
    value = getattr(args, "jobs", None)
    if value is None:
        value = settings.JOBS
    if value < 1:
        raise UsageError(f"--jobs must be at least 1, got {value}")
    return value


def resolve_config(args: argparse.Namespace, **overrides: Any) -> ExperimentConfig:
    """
    Config for a command: defaults < --config file < OC_SEED < flags.
    """
    values: Dict[str, Any] = dict(overrides)
    values["seed"] = getattr(args, "seed", None)
    config = load_config(getattr(args, "config", None), values)
    logger.debug(f"Resolved config: seed={config.seed} arch={config.arch} loss={config.loss}")
    return config


def modality_for_channels(channels: int) -> Modality:
    for modality, count in MODALITY_CHANNELS.items():
        if count == channels:
            return modality
    raise DataContractError(f"no capture modality has {channels} channels")


def container_path(data: str, split: str, modality: Modality) -> Path:
    """
    ``data`` is either a container file or a directory written by ``gen``.
    """
    path = Path(data)
    if path.is_dir():
        path = path / container_name(split, modality)
    if not path.is_file():
        raise DataContractError(f"container not found: {path}")
    return path


def output_path(out: Optional[str], default: Path) -> Path:
    return Path(out) if out else default
