"""
Command-line application for Free Group Lab
Parses the global flags, loads settings and dispatches to the command
modules. Every error maps to a stable exit status.
"""

import argparse
import logging
import secrets
import sys
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional

from cli.commands import COMMANDS
from core.config_manager import ConfigManager, Settings
from core.errors import FreeGroupError

log = logging.getLogger(__name__)


class ExitStatus(IntEnum):
    OK = 0
    USAGE = 2
    INVALID_INPUT = 3
    RESOURCE_CAP = 4
    PROPERTY_FAILS = 10


@dataclass
class CommandContext:
    config: ConfigManager
    settings: Settings
    json: bool = False
    seed: Optional[int] = None

    def resolve_seed(self) -> int:
        """The --seed value, or a fresh entropy seed reported on stderr"""
        if self.seed is None:
            self.seed = secrets.randbits(63)
            print(f"seed: {self.seed}", file=sys.stderr)
        return self.seed


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; subcommands repeat them so they may follow the command name"""
    default = argparse.SUPPRESS if suppress else None
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default, help="master seed for random commands")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="machine-readable output")
    common.add_argument("--settings", default=default, metavar="PATH", help="settings file")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0,
                        help="more logging (-v info, -vv debug)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freegroups",
        description="Free Group Lab: subgroups of free groups, generic properties and random presentations",
        parents=[_common_flags(suppress=False)],
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    common = _common_flags(suppress=True)
    for module in COMMANDS:
        module.register(subparsers, common)
    return parser


def _setup_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help
        return int(exc.code or 0)

    _setup_logging(args.verbose)
    handler = getattr(args, "handler", None)
    if handler is None:
        parser.print_help(sys.stderr)
        return ExitStatus.USAGE

    config = ConfigManager(args.settings)
    ctx = CommandContext(config=config, settings=config.settings, json=args.json, seed=args.seed)
    try:
        return int(handler(args, ctx))
    except FreeGroupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
