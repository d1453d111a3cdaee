"""
`invariance` command: first-crossing angles of time-changed image paths
against exit angles of Brownian motion started directly at f(a).

Paths from a are stopped at |z - a| = r and mapped through f; each image
path starts at v = f(a) and must cross |w - v| = m, where m is the
distance from v to f(circle). If the time-changed image is a Brownian
motion, its crossing angles and those of a direct Brownian motion from v
stopped at the same circle share one law.
"""

import argparse
import logging
import math

import numpy as np

from ..analytic import CircleSpec, evaluate, is_nonconstant, min_on_circle, parse_expression
from ..brownian import RngStream, SamplerConfig, sample_path_until_exit
from ..errors import DegenerateMarginError, NonconstantRequiredError, OmtLabError
from ..estimators import sample_exits, two_sample_angle_test
from ..experiment import DomainSpec, select_radius
from ..geometry import normalize_angle
from ..parallel import map_paths
from ..settings import get_settings
from ..time_change import compute_clock, first_crossing, map_path
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

DEFAULT_N = 10_000

# First radius of the default radius search
START_RADIUS = 0.5

# Stream family of the direct Brownian motions, disjoint from the image paths
DIRECT_STREAM_OFFSET = 1 << 32


def register_invariance_command(subparsers) -> None:
    """
    Register the `invariance` command.

    Args:
        subparsers: argparse subparsers action of the top-level parser
    """
    settings = get_settings()
    parser = subparsers.add_parser(
        "invariance",
        help="two-sample test of image crossing angles against direct Brownian motion",
        description="Compare first-crossing angles of time-changed images f(B) with "
                    "exit angles of Brownian motion started at f(a)."
    )
    parser.add_argument("--f", dest="function_text", required=True, help="analytic function of z")
    parser.add_argument("--a", type=complex_literal, required=True, help="start point a")
    parser.add_argument("--radius", type=positive_real, default=None,
                        help=f"stopping radius around a (default: halved from {START_RADIUS} "
                             "until the margin test passes)")
    parser.add_argument("--bins", type=positive_int, default=settings.invariance_bins,
                        help=f"two-sample chi-square bins (default: {settings.invariance_bins})")
    add_common_arguments(parser, DEFAULT_N)
    parser.set_defaults(execute=execute_invariance, resolve=resolve_invariance)


def resolve_invariance(args: argparse.Namespace) -> dict:
    settings = get_settings()
    return {
        "a": echo_complex(args.a),
        "radius": args.radius,
        "bins": args.bins,
        "step_scale": settings.step_scale,
        "boundary_tol": settings.boundary_tol,
        "max_steps": settings.max_steps,
        "image_steps": settings.image_steps,
        "circle_samples": settings.circle_samples,
        "margin_tol": settings.margin_tol,
        "max_halvings": settings.max_halvings,
        "significance": settings.significance,
    }


def image_crossing_angles(f, a: complex, circle: CircleSpec, v: complex, m: float,
                          sampler: SamplerConfig, n: int, seed: int, image_steps: int,
                          threads=None) -> tuple[np.ndarray, int]:
    """
    Crossing angles of |w - v| = m by the image paths of n stopped paths.

    Returns:
        (angles of the successful paths, number of failed paths)
    """
    def task(index: int):
        try:
            path = sample_path_until_exit(a, circle, sampler, RngStream(seed, index))
            clock = compute_clock(path, f)
            image = map_path(path, f, clock.sigma_end / image_steps, clock)
        except OmtLabError as e:
            logger.debug(f"Image path {index} failed: {e}")
            return None
        crossing = first_crossing(image, v, m)
        if crossing is None:
            return None
        offset = crossing.point - v
        return normalize_angle(math.atan2(offset.imag, offset.real))

    outcomes = map_paths(task, n, threads)
    angles = np.array([angle for angle in outcomes if angle is not None], dtype=float)
    return angles, n - len(angles)


def stopping_radius(f, a: complex, v: complex, p: dict) -> float:
    """
    The stopping radius: --radius as given, or halved from START_RADIUS
    until min |f - v| on |z - a| = r exceeds the margin tolerance.
    """
    if p["radius"] is None:
        return select_radius(f, a, DomainSpec(a, 2 * START_RADIUS), v=v, margin_tol=p["margin_tol"],
                             max_halvings=p["max_halvings"], K=p["circle_samples"])
    return p["radius"]


def execute_invariance(config: RunConfig) -> CommandResult:
    p = config.parameters
    f = parse_expression(config.function_text)
    if not is_nonconstant(f):
        raise NonconstantRequiredError("nonconstant required: f is constant")
    a = complex_literal(p["a"])
    v = evaluate(f, a)
    radius = stopping_radius(f, a, v, p)
    circle = CircleSpec(a, radius)
    minimum = min_on_circle(f, circle, v, p["circle_samples"])
    if not minimum.m > p["margin_tol"]:
        raise DegenerateMarginError(
            f"margin m = {minimum.m:.3g} on |z - a| = {radius} is too small; choose another --radius"
        )
    m = minimum.m
    sampler = SamplerConfig(step_dt=p["step_scale"] * radius * radius,
                            boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])

    logger.info("=" * 60)
    logger.info(f"invariance: f={config.function_text} a={a} r={radius} v={v} m={m:.6g}")
    logger.info("=" * 60)

    image_angles, failures = image_crossing_angles(
        f, a, circle, v, m, sampler, config.n, config.seed, p["image_steps"], config.worker_threads
    )
    if len(image_angles) < 5 * p["bins"]:
        raise OmtLabError(f"only {len(image_angles)} image paths crossed |w - v| = m")

    direct_sampler = SamplerConfig(step_dt=p["step_scale"] * m * m,
                                   boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])
    direct = sample_exits(v, CircleSpec(v, m), config.n, direct_sampler, seed=config.seed,
                          first_stream=DIRECT_STREAM_OFFSET, threads=config.worker_threads)
    test = two_sample_angle_test(image_angles, direct.angles, p["bins"])
    same_law = test.p_value > p["significance"]
    logger.info(f"invariance: chi2={test.statistic:.3f} p={test.p_value:.4g}")

    results = {
        "r": radius,
        "step_dt": sampler.step_dt,
        "v": {"re": v.real, "im": v.imag},
        "m": m,
        "image_paths": int(len(image_angles)),
        "image_failures": failures,
        "direct_paths": int(len(direct.angles)),
        "direct_step_dt": direct_sampler.step_dt,
        "two_sample": {"statistic": test.statistic, "p_value": test.p_value},
        "dumped_paths": dump_sample_paths(config, a, circle, sampler),
    }
    summary = [
        ("r", f"{radius:.6g}"),
        ("m", f"{m:.6g}"),
        ("image paths", f"{len(image_angles)} ({failures} failed)"),
        ("two-sample chi-square", f"{test.statistic:.3f} (p = {test.p_value:.4g})"),
    ]
    return CommandResult(results=results, verdicts={"invariance": bool(same_law)}, summary=summary)
