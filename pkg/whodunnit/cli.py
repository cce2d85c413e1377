"""
Command-line entry point: ``whodunnit <command> [--config FILE] [--key value ...]``.

Exit codes: 0 on success, 1 when a stage fails, 2 for configuration or
usage errors.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from whodunnit.config import load_run_config, parse_overrides
from whodunnit.errors import ConfigError, WhodunnitError
from whodunnit.pipeline import STAGES


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_FORMAT = "%(levelname)s: %(message)s"

COMMAND_HELP = {
    "parse": "parse screenplays into the interchange corpus",
    "align": "time-stamp sentences against caption files",
    "featurize": "build the vocabulary and per-episode feature caches",
    "synth": "generate a synthetic dataset",
    "train": "train one model per fold and run",
    "eval": "predict test folds and held-out cases, then write the report",
    "report": "regenerate report CSVs from saved traces",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level")

    parser = argparse.ArgumentParser(
        prog="whodunnit",
        description="Incremental perpetrator identification in crime-drama screenplays. "
                    "Any configuration key can be given as --key value.",
        allow_abbrev=False,
    )
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True
    for name, help_text in COMMAND_HELP.items():
        commands.add_parser(name, parents=[common], help=help_text, allow_abbrev=False)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one pipeline command.

    Args:
        argv: Arguments without the program name; sys.argv[1:] when None

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)

    try:
        config = load_run_config(args.config, parse_overrides(extra))
        written: List[Path] = STAGES[args.command](config)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except (WhodunnitError, OSError) as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_FAILURE

    logger.debug("%s wrote %d outputs", args.command, len(written))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
