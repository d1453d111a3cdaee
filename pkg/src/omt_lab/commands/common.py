"""
Shared pieces of the command modules: the run configuration, the result
document, flag value types and the path dump helper.
"""

import argparse
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..analytic import CircleSpec, format_complex, parse_complex
from ..brownian import BmPath, RngStream, SamplerConfig, sample_path_until_exit
from ..dump import write_paths_csv
from ..errors import BudgetExceededError, ContractError
from ..settings import get_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """
    A parsed invocation. `parameters` holds the command's numeric and
    textual parameters with every default resolved.
    """

    command: str
    seed: int
    n: int
    parameters: dict[str, Any]
    function_text: Optional[str] = None
    out_path: Optional[str] = None
    threads: Optional[int] = None
    dump_paths: Optional[str] = None
    dump_gamma: Optional[str] = None
    no_timing: bool = False
    quiet: bool = False
    log_level: str = "WARNING"

    @property
    def worker_threads(self) -> int:
        return self.threads or get_settings().worker_threads

    def to_dict(self) -> dict:
        """Echo of the configuration as written to the output document."""
        echoed = {
            "command": self.command,
            "seed": self.seed,
            "n": self.n,
            "threads": self.worker_threads,
        }
        if self.function_text is not None:
            echoed["f"] = self.function_text
        echoed.update(self.parameters)
        echoed["out"] = self.out_path
        echoed["dump_paths"] = self.dump_paths
        if self.command == "omt":
            echoed["dump_gamma"] = self.dump_gamma
        return echoed


@dataclass
class CommandResult:
    """Results and verdicts of one command; `passed` drives the exit code."""

    results: dict[str, Any]
    verdicts: dict[str, bool]
    summary: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


Executor = Callable[[RunConfig], CommandResult]


# ============================================================================
# FLAG TYPES
# ============================================================================

def complex_literal(text: str) -> complex:
    """argparse type for `<real>`, `<real>+<real>i` and `<real>-<real>i`."""
    try:
        return parse_complex(text)
    except ContractError as e:
        raise argparse.ArgumentTypeError(f"malformed complex literal {text!r}") from e


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return value


def real(text: str) -> float:
    return _finite(text)


def positive_real(text: str) -> float:
    value = _finite(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text!r}")
    return value


def seed_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from e


def add_common_arguments(parser: argparse.ArgumentParser, default_n: int) -> None:
    """Flags shared by every command."""
    parser.add_argument("--n", type=positive_int, default=default_n,
                        help=f"number of paths (default: {default_n})")
    parser.add_argument("--seed", type=seed_int, default=0, help="master seed (default: 0)")
    parser.add_argument("--threads", type=positive_int, default=None,
                        help="worker threads (default: machine parallelism)")
    parser.add_argument("--out", dest="out_path", default=None,
                        help="write the JSON document here instead of stdout")
    parser.add_argument("--dump-paths", dest="dump_paths", default=None,
                        help="write the first sampled paths as t,re,im CSV files")
    parser.add_argument("--no-timing", dest="no_timing", action="store_true",
                        help="omit the wall-clock duration from the output")
    parser.add_argument("--quiet", action="store_true", help="no summary on stderr")
    parser.add_argument("--log-level", dest="log_level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="logging level on stderr")


def complex_dict(value: complex) -> dict:
    return {"re": value.real, "im": value.imag}


def echo_complex(value: complex) -> str:
    return format_complex(complex(value))


# ============================================================================
# PATH DUMPS
# ============================================================================

def dump_sample_paths(
    config: RunConfig,
    start: complex,
    circle: CircleSpec,
    sampler: SamplerConfig,
    first_stream: int = 0
) -> list[str]:
    """
    Resample the first paths of a run from their streams and write them.

    Returns:
        Written file names
    """
    if config.dump_paths is None:
        return []
    count = min(get_settings().dump_paths_cap, config.n)
    paths: list[BmPath] = []
    for index in range(count):
        try:
            paths.append(sample_path_until_exit(start, circle, sampler,
                                                RngStream(config.seed, first_stream + index)))
        except BudgetExceededError as e:
            paths.append(e.partial_path)
    return [str(name) for name in write_paths_csv(paths, config.dump_paths, count)]
