"""
Main application entry point for the one-class PAD command line.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from ocpad import __version__
from ocpad.cli import COMMANDS
from ocpad.cli.common import common_parser
from ocpad.config import settings
from ocpad.errors import OcPadError, UsageError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="One-class fingerprint presentation attack detection with autoencoders",
        parents=[common_parser()],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and map its outcome to an exit code.
    """
    args = build_parser().parse_args(argv)
    setup_logging(getattr(args, "verbose", False))
    try:
        return args.handler(args)
    except OcPadError as exc:
        logger.error(f"{type(exc).__name__}: {exc.detail}")
        return exc.exit_code
    except ValidationError as exc:
        error = UsageError(str(exc))
        logger.error(f"UsageError: {error.detail}")
        return error.exit_code
    except OSError as exc:
        logger.error(f"I/O error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
