"""
`lemma` command: first-hit probability of an arc of an inner circle.

Optionally also estimates the probability of entering an open disk V
before exiting the outer circle, next to the lower bound given by the
widest arc of the inner circle inside V.
"""

import argparse
import logging
import math

from ..analytic import CircleSpec
from ..brownian import SamplerConfig, disk_region
from ..errors import UsageError
from ..estimators import ArcSpec, estimate_arc_first_hit, estimate_open_set_hit, inscribed_arc
from ..settings import get_settings
from .common import (
    CommandResult,
    RunConfig,
    add_common_arguments,
    complex_literal,
    dump_sample_paths,
    echo_complex,
    positive_real,
    real,
)

logger = logging.getLogger(__name__)

DEFAULT_N = 100_000


def register_lemma_command(subparsers) -> None:
    """
    Register the `lemma` command.

    Args:
        subparsers: argparse subparsers action of the top-level parser
    """
    parser = subparsers.add_parser(
        "lemma",
        help="arc first-hit probability against (theta2 - theta1) / (2*pi)",
        description="Estimate the probability that Brownian motion from the center "
                    "first reaches the inner circle through an open arc."
    )
    parser.add_argument("--center", type=complex_literal, default=0j,
                        help="circle center a (default: 0+0i)")
    parser.add_argument("--radius", type=positive_real, default=1.0,
                        help="outer radius r (default: 1)")
    parser.add_argument("--arc-radius", dest="arc_radius", type=positive_real, default=0.5,
                        help="inner radius r' < r (default: 0.5)")
    parser.add_argument("--theta1", type=real, default=0.0, help="arc start angle in radians")
    parser.add_argument("--theta2", type=real, default=math.pi, help="arc end angle in radians")
    parser.add_argument("--set-center", dest="set_center", type=complex_literal, default=None,
                        help="center of an open disk V for the open-set estimate")
    parser.add_argument("--set-radius", dest="set_radius", type=positive_real, default=None,
                        help="radius of V")
    add_common_arguments(parser, DEFAULT_N)
    parser.set_defaults(execute=execute_lemma, resolve=resolve_lemma)


def resolve_lemma(args: argparse.Namespace) -> dict:
    """Command parameters with defaults, as echoed in the output."""
    if (args.set_center is None) != (args.set_radius is None):
        flag = "--set-radius" if args.set_radius is None else "--set-center"
        raise UsageError(f"argument {flag}: --set-center and --set-radius go together", flag=flag)
    if not args.arc_radius < args.radius:
        raise UsageError("argument --arc-radius: must be smaller than --radius", flag="--arc-radius")
    parameters = {
        "center": echo_complex(args.center),
        "radius": args.radius,
        "arc_radius": args.arc_radius,
        "theta1": args.theta1,
        "theta2": args.theta2,
        "step_dt": get_settings().step_dt(args.arc_radius),
        "boundary_tol": get_settings().boundary_tol,
        "max_steps": get_settings().max_steps,
    }
    if args.set_center is not None:
        parameters["set_center"] = echo_complex(args.set_center)
        parameters["set_radius"] = args.set_radius
        parameters["set_step_dt"] = get_settings().step_dt(args.radius)
    return parameters


def execute_lemma(config: RunConfig) -> CommandResult:
    """Run the arc estimator and, when V is given, the open-set estimator."""
    p = config.parameters
    center = complex_literal(p["center"])
    circle = CircleSpec(center, p["radius"])
    arc = ArcSpec(center, p["arc_radius"], p["theta1"], p["theta2"])
    sampler = SamplerConfig(step_dt=p["step_dt"], boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])

    report = estimate_arc_first_hit(circle, arc, config.n, sampler, seed=config.seed,
                                    threads=config.worker_threads)
    results = {"arc": report.to_dict()}
    verdicts = {"arc": bool(report.passed)}
    summary = [
        ("p_hat", f"{report.p_hat:.5f}"),
        ("reference", f"{report.reference:.5f}"),
        ("95% CI", f"[{report.ci_low:.5f}, {report.ci_high:.5f}]"),
    ]

    if "set_center" in p:
        set_center = complex_literal(p["set_center"])
        outer = SamplerConfig(step_dt=p["set_step_dt"], boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])
        hit = estimate_open_set_hit(circle, center, disk_region(set_center, p["set_radius"]),
                                    config.n, outer, seed=config.seed, threads=config.worker_threads)
        window = inscribed_arc(set_center, p["set_radius"], center, p["arc_radius"])
        lower_bound = 0.0 if window is None else window.reference
        results["open_set"] = {**hit.to_dict(), "lower_bound": lower_bound}
        verdicts["open_set"] = bool(hit.passed) if window is not None else True
        summary.append(("open-set p_hat", f"{hit.p_hat:.5f} (bound {lower_bound:.5f})"))

    results["dumped_paths"] = dump_sample_paths(config, center, CircleSpec(center, p["arc_radius"]), sampler)
    logger.info(f"lemma: p_hat={report.p_hat:.5f} passed={report.passed}")
    return CommandResult(results=results, verdicts=verdicts, summary=summary)
