"""
Command-line front end.

    omt-lab lemma --center 0+0i --radius 1 --arc-radius 0.5 --theta1 0 --theta2 3.141592653589793 --n 100000 --seed 42
    omt-lab omt --f "z^2" --a 0+0i --W-center 0+0i --W-radius 2 --n 100000 --seed 7

Every invocation writes one JSON document (schema 1) to stdout or --out.
Exit code 0 means every verdict passed, 1 means a verdict failed and 2
means a usage or execution error.
"""

import argparse
import json
import logging
import re
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from . import __version__
from .commands import (
    COMMANDS,
    CommandResult,
    RunConfig,
    register_invariance_command,
    register_lemma_command,
    register_omt_command,
    register_uniformity_command,
)
from .commands.invariance import execute_invariance
from .commands.lemma import execute_lemma
from .commands.omt import execute_omt
from .commands.uniformity import execute_uniformity
from .errors import OmtLabError, UsageError
from .settings import get_settings

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

EXECUTORS = {
    "lemma": execute_lemma,
    "uniformity": execute_uniformity,
    "invariance": execute_invariance,
    "omt": execute_omt,
}

_ARGUMENT_RE = re.compile(r"argument ([^:\s]+):")
_UNRECOGNIZED_RE = re.compile(r"unrecognized arguments: (\S+)")
_REQUIRED_RE = re.compile(r"required: ([^,\s]+)")


def _flag_of(message: str) -> Optional[str]:
    for pattern in (_ARGUMENT_RE, _UNRECOGNIZED_RE, _REQUIRED_RE):
        match = pattern.search(message)
        if match:
            return match.group(1).split("/")[0]
    return None


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}", flag=_flag_of(message))


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(
        prog="omt-lab",
        description="Monte Carlo lab for the open mapping theorem via conformal invariance of Brownian motion."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    register_lemma_command(subparsers)
    register_uniformity_command(subparsers)
    register_invariance_command(subparsers)
    register_omt_command(subparsers)
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    """
    Parse a command line into a RunConfig with every default resolved.

    Args:
        argv: Arguments without the program name

    Returns:
        RunConfig

    Raises:
        UsageError: On unknown commands or flags, missing required flags and
            malformed values; `flag` names the offending flag
    """
    args = build_parser().parse_args(list(argv))
    parameters = args.resolve(args)
    return RunConfig(
        command=args.command,
        seed=args.seed,
        n=args.n,
        parameters=parameters,
        function_text=getattr(args, "function_text", None),
        out_path=args.out_path,
        threads=args.threads,
        dump_paths=args.dump_paths,
        dump_gamma=getattr(args, "dump_gamma", None),
        no_timing=args.no_timing,
        quiet=args.quiet,
        log_level=args.log_level or get_settings().log_level
    )


def error_document(command: Optional[str], error: BaseException) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "error": {"type": type(error).__name__, "message": str(error)},
    }


def _emit(document: dict, out_path: Optional[str]) -> None:
    text = json.dumps(document, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        target = Path(out_path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")


def _print_summary(config: RunConfig, result: CommandResult) -> None:
    console = Console(stderr=True)
    table = Table(title=f"omt-lab {config.command}", show_header=False)
    table.add_column("quantity", style="cyan")
    table.add_column("value")
    for name, value in result.summary:
        table.add_row(name, value)
    for name, passed in result.verdicts.items():
        table.add_row(f"verdict: {name}", "[green]pass[/green]" if passed else "[red]fail[/red]")
    console.print(table)


def run(config: RunConfig) -> int:
    """
    Execute a parsed command and write its JSON document.

    Returns:
        0 if every verdict passed, 1 if one failed, 2 on an execution error
    """
    started = time.perf_counter()
    try:
        result = EXECUTORS[config.command](config)
    except OmtLabError as e:
        logger.error(f"{config.command} failed: {e}")
        _emit(error_document(config.command, e), config.out_path)
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error in {config.command}")
        _emit(error_document(config.command, e), config.out_path)
        return EXIT_ERROR

    document = {
        "schema": SCHEMA_VERSION,
        "command": config.command,
        "config": config.to_dict(),
        "results": result.results,
        "verdicts": result.verdicts,
        "passed": result.passed,
    }
    if not config.no_timing:
        document["duration_s"] = time.perf_counter() - started
    _emit(document, config.out_path)
    if not config.quiet:
        _print_summary(config, result)
    return EXIT_PASS if result.passed else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point."""
    load_dotenv()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        command = argv[0] if argv and argv[0] in COMMANDS else None
        _emit(error_document(command, e), None)
        return EXIT_ERROR
    except ValidationError as e:
        sys.stderr.write(f"invalid OMT_LAB_* setting: {e}\n")
        command = argv[0] if argv and argv[0] in COMMANDS else None
        _emit(error_document(command, e), None)
        return EXIT_ERROR

    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
