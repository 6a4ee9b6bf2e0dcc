"""Command-line entry point: python -m app.main <command> ..."""

import logging
import sys
from typing import List, Optional

from domain.entities.exceptions import (
    ArtifactIOException,
    BaseFecException,
    ResourceLimitException,
    ValidationException,
)
from infrastructure.logging.config import set_run_context, setup_logging
from interfaces.cli.commands import COMMANDS
from interfaces.cli.parser import build_parser
from shared.config.settings import settings
from .dependencies import DependencyContainer, container

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE_LIMIT = 3
EXIT_IO = 4


def exit_code_for(error: BaseFecException) -> int:
    if isinstance(error, ResourceLimitException):
        return EXIT_RESOURCE_LIMIT
    if isinstance(error, ArtifactIOException):
        return EXIT_IO
    if isinstance(error, ValidationException):
        return EXIT_VALIDATION
    return EXIT_VALIDATION


def main(argv: Optional[List[str]] = None, deps: Optional[DependencyContainer] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.debug:
        settings.debug = True
    setup_logging(log_dir=args.log_dir)
    run_id = set_run_context(command=args.command)
    logger.info("Command started", extra={"run_id": run_id, "argv": list(argv or sys.argv[1:])})

    try:
        code = COMMANDS[args.command](args, deps or container)
    except BaseFecException as e:
        logger.error(f"{args.command} failed: {e.message}", extra={"error_type": type(e).__name__})
        sys.stderr.write(f"error: {e.message}\n")
        return exit_code_for(e)
    except Exception:
        logger.exception(f"{args.command} crashed")
        raise
    logger.info("Command finished", extra={"exit_code": code})
    return code


if __name__ == "__main__":
    sys.exit(main())
