"""
`uniformity` command: exit angles from the center of a disk against the
uniform law, and exit times against E[tau] = r^2 / 2.
"""

import argparse
import logging

from ..analytic import CircleSpec
from ..brownian import SamplerConfig
from ..estimators import chi_square_uniformity, estimate_exit_time, sample_exits
from ..settings import get_settings
from .common import (
    CommandResult,
    RunConfig,
    add_common_arguments,
    complex_literal,
    dump_sample_paths,
    echo_complex,
    positive_int,
    positive_real,
)

logger = logging.getLogger(__name__)

DEFAULT_N = 100_000


def register_uniformity_command(subparsers) -> None:
    """
    Register the `uniformity` command.

    Args:
        subparsers: argparse subparsers action of the top-level parser
    """
    settings = get_settings()
    parser = subparsers.add_parser(
        "uniformity",
        help="chi-square test of exit angles and exit-time calibration",
        description="Sample exits from the center of a disk and test the exit angles "
                    "for uniformity; compare the mean exit time with r^2 / 2."
    )
    parser.add_argument("--center", type=complex_literal, default=0j,
                        help="disk center (default: 0+0i)")
    parser.add_argument("--radius", type=positive_real, default=1.0, help="disk radius (default: 1)")
    parser.add_argument("--bins", type=positive_int, default=settings.uniformity_bins,
                        help=f"chi-square bins (default: {settings.uniformity_bins})")
    parser.add_argument("--step-dt", dest="step_dt", type=positive_real, default=None,
                        help="sampler time step (default: step_scale * r^2)")
    add_common_arguments(parser, DEFAULT_N)
    parser.set_defaults(execute=execute_uniformity, resolve=resolve_uniformity)


def resolve_uniformity(args: argparse.Namespace) -> dict:
    settings = get_settings()
    return {
        "center": echo_complex(args.center),
        "radius": args.radius,
        "bins": args.bins,
        "step_dt": args.step_dt if args.step_dt is not None else settings.step_dt(args.radius),
        "boundary_tol": settings.boundary_tol,
        "max_steps": settings.max_steps,
        "significance": settings.significance,
    }


def execute_uniformity(config: RunConfig) -> CommandResult:
    p = config.parameters
    center = complex_literal(p["center"])
    circle = CircleSpec(center, p["radius"])
    sampler = SamplerConfig(step_dt=p["step_dt"], boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])

    sample = sample_exits(center, circle, config.n, sampler, seed=config.seed, threads=config.worker_threads)
    chi_square = chi_square_uniformity(sample.angles, p["bins"])
    exit_time = estimate_exit_time(center, circle, sample.times)
    uniform = chi_square.p_value > p["significance"]
    logger.info(f"uniformity: chi2={chi_square.statistic:.3f} p={chi_square.p_value:.4g}")

    results = {
        "chi_square": {
            "statistic": chi_square.statistic,
            "p_value": chi_square.p_value,
            "dof": p["bins"] - 1,
        },
        "exit_time": exit_time.to_dict(),
        "dumped_paths": dump_sample_paths(config, center, circle, sampler),
    }
    summary = [
        ("chi-square", f"{chi_square.statistic:.3f} (p = {chi_square.p_value:.4g})"),
        ("mean exit time", f"{exit_time.mean:.5f} +/- {exit_time.std_error:.5f}"),
        ("reference", f"{exit_time.reference:.5f}"),
    ]
    return CommandResult(
        results=results,
        verdicts={"uniformity": bool(uniform), "exit_time": exit_time.passed},
        summary=summary
    )
