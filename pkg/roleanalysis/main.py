import argparse
import sys
import time
from typing import List, Optional

import structlog

from roleanalysis import __version__
from roleanalysis.commands import algebra, analysis
from roleanalysis.commands.base import AnalysisConfig
from roleanalysis.config import config
from roleanalysis.config.logging import configure_logging
from roleanalysis.exceptions import InputValidationError, RoleAnalysisError

logger = structlog.get_logger()


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors become input validation errors (exit code 1)."""

    def error(self, message: str) -> None:
        raise InputValidationError(message, module="cli")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="roleanalysis",
        description="Positional and role analysis of multirelational graphs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
    subparsers.required = True
    analysis.register(subparsers)
    algebra.register(subparsers)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, validate and dispatch one subcommand; returns the exit code."""
    start_time = time.time()
    command = None
    configure_logging(config.LOG_LEVEL, config.LOG_JSON)
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        if getattr(args, "log_level", None):
            configure_logging(args.log_level, config.LOG_JSON)
        cfg = AnalysisConfig.from_args(args)
        logger.info("Command started", command=command, input=str(cfg.input or cfg.fixture), threads=cfg.threads)
        code = args.handler(args, cfg)
        logger.info("Command completed", command=command, exit_code=code, seconds=round(time.time() - start_time, 4))
        return code

    except RoleAnalysisError as e:
        logger.error("Command failed", command=command, module=e.module, error=str(e), exit_code=e.exit_code)
        sys.stderr.write(f"error [{e.module}]: {e}\n")
        return e.exit_code

    except Exception as e:
        logger.error("Unhandled exception", command=command, error=str(e), error_type=type(e).__name__)
        if config.DEBUG:
            raise
        sys.stderr.write(f"error: unexpected {type(e).__name__}: {e}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
