"""
Open Book Spectral Toolkit - command-line entry point.
Mounts the validate, spectrum, convergence and export commands.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from openbook import __version__
from openbook.commands import COMMANDS
from openbook.core.errors import BookFileError, OpenBookError

logger = logging.getLogger("openbook")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openbook",
        description="Spectra of Laplacians on open books glued by junction conditions",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress (-vv for debug)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        return args.handler(args)
    except BookFileError as exc:
        for line in exc.format_lines():
            print(f"error: {line}")
    except ValidationError as exc:
        for error in exc.errors():
            where = ".".join(str(part) for part in error["loc"])
            message = error["msg"].removeprefix("Value error, ")
            print(f"error: --{where.replace('_', '-')}: {message}")
    except OpenBookError as exc:
        print(f"error: {exc}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
