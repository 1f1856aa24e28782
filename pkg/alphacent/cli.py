import argparse
import importlib
import logging
import sys
from typing import Optional, Sequence

from . import __version__, config
from .constants import ExitStatus
from .errors import (
    AlphaCentralityError,
    DimensionMismatch,
    GraphError,
    InfeasibleTarget,
    InvalidConfiguration,
    InvalidControlInstance,
    MaxRoundsExceeded,
    NonConvergence,
    ScenarioError,
)

log = logging.getLogger("alphacent")

COMMANDS = [
    "estimate",
    "consensus",
    "control",
]

INPUT_ERRORS = (ScenarioError, GraphError, DimensionMismatch, InvalidConfiguration, InvalidControlInstance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphacent",
        description="Distributed estimation and control of alpha-centrality.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        importlib.import_module(f"alphacent.commands.{name}").setup(subparsers)
    return parser


def configure_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = config.LOG_LEVEL
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def exit_status(error: AlphaCentralityError) -> ExitStatus:
    if isinstance(error, InfeasibleTarget):
        return ExitStatus.INFEASIBLE
    if isinstance(error, (MaxRoundsExceeded, NonConvergence)):
        return ExitStatus.NOT_CONVERGED
    if isinstance(error, INPUT_ERRORS):
        return ExitStatus.INPUT_ERROR
    return ExitStatus.FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        status = args.handler(args)
    except AlphaCentralityError as e:
        status = exit_status(e)
        log.error(f"{args.command}: {e}")
    except OSError as e:
        status = ExitStatus.IO_ERROR
        log.error(f"{args.command}: cannot write results: {e}")

    return int(status)


if __name__ == "__main__":
    sys.exit(main())
