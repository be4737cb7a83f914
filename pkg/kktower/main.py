"""
Command-line entry point

    python -m kktower.main <spectrum|evolve|verify|oracle-compare> --scenario PATH [--out DIR]
        [--threads N] [--seed S]
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from kktower import __version__
from kktower.cli import COMMANDS
from kktower.core.config import get_settings
from kktower.core.logging import configure_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kktower",
        description="Kaluza-Klein tower engine for the Klein-Gordon equation on the flat Poincare patch of AdS5",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--scenario", required=True, help="Scenario JSON file")
        cmd.add_argument("--out", default=None, help="Output directory (default OUTPUT_DIR/<scenario name>)")
        cmd.add_argument("--threads", type=int, default=None, help="Workers for kernel construction")
        cmd.add_argument("--seed", type=int, default=None, help="Seed recorded with randomised test data")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("--threads must be at least 1", file=sys.stderr)
            return 2
        os.environ["THREADS"] = str(args.threads)
        get_settings.cache_clear()

    settings = get_settings()
    configure_logging(settings.LOG_LEVEL, settings.LOG_JSON)
    logger.info(f"{settings.PROJECT_NAME} {__version__}: {args.command} {args.scenario}")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
