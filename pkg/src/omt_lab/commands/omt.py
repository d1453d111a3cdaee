"""
`omt` command: the open-mapping experiment with its containment verdict.
"""

import argparse
import logging

from ..analytic import CircleSpec, parse_expression
from ..brownian import SamplerConfig
from ..dump import write_gamma_csv
from ..errors import UsageError
from ..experiment import (
    DomainSpec,
    OmtConfig,
    build_gamma,
    containment_check,
    direct_image_coverage,
    run_experiment,
)
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


def register_omt_command(subparsers) -> None:
    """
    Register the `omt` command.

    Args:
        subparsers: argparse subparsers action of the top-level parser
    """
    settings = get_settings()
    parser = subparsers.add_parser(
        "omt",
        help="crossing and coverage experiment for a nonconstant analytic function",
        description="Select r, build gamma = f(|z - a| = r) and its margin m, push "
                    "stopped paths through the time change and check that the image "
                    "paths cover D(v, m)."
    )
    parser.add_argument("--f", dest="function_text", required=True, help="analytic function of z")
    parser.add_argument("--a", type=complex_literal, required=True, help="point a of W")
    parser.add_argument("--W-center", dest="W_center", type=complex_literal, required=True,
                        help="center of the domain disk W")
    parser.add_argument("--W-radius", dest="W_radius", type=positive_real, required=True,
                        help="radius of the domain disk W")
    parser.add_argument("--r0", type=positive_real, default=None,
                        help="starting radius of the radius search (default: half the distance to the boundary of W)")
    parser.add_argument("--grid-cells", dest="grid_cells", type=positive_int, default=settings.grid_cells,
                        help=f"coverage grid cells per axis (default: {settings.grid_cells})")
    parser.add_argument("--oracle-points", dest="oracle_points", type=int, default=0,
                        help="points of the direct-image coverage oracle (default: 0, off)")
    parser.add_argument("--dump-gamma", dest="dump_gamma", default=None,
                        help="write the gamma curve as theta,re,im CSV")
    add_common_arguments(parser, DEFAULT_N)
    parser.set_defaults(execute=execute_omt, resolve=resolve_omt)


def resolve_omt(args: argparse.Namespace) -> dict:
    settings = get_settings()
    if args.oracle_points < 0:
        raise UsageError("argument --oracle-points: must be nonnegative", flag="--oracle-points")
    W = DomainSpec(args.W_center, args.W_radius)
    if not W.contains(args.a):
        raise UsageError("argument --a: must lie strictly inside W", flag="--a")
    r0 = args.r0 if args.r0 is not None else W.boundary_distance(args.a) / 2.0
    return {
        "a": echo_complex(args.a),
        "W_center": echo_complex(args.W_center),
        "W_radius": args.W_radius,
        "r0": r0,
        "grid_cells": args.grid_cells,
        "oracle_points": args.oracle_points,
        "step_scale": settings.step_scale,
        "boundary_tol": settings.boundary_tol,
        "max_steps": settings.max_steps,
        "margin_tol": settings.margin_tol,
        "max_halvings": settings.max_halvings,
        "circle_samples": settings.circle_samples,
        "gamma_samples": settings.gamma_samples,
        "image_steps": settings.image_steps,
        "cell_fraction": settings.cell_fraction,
    }


def execute_omt(config: RunConfig) -> CommandResult:
    p = config.parameters
    f = parse_expression(config.function_text)
    a = complex_literal(p["a"])
    W = DomainSpec(complex_literal(p["W_center"]), p["W_radius"])
    cfg = OmtConfig(
        f=f,
        a=a,
        W=W,
        n_paths=config.n,
        grid_cells=p["grid_cells"],
        seed=config.seed,
        r0=p["r0"],
        gamma_samples=p["gamma_samples"],
        threads=config.worker_threads
    )
    report = run_experiment(cfg)
    verdict = containment_check(report)
    results = {"report": report.to_dict()}

    if p["oracle_points"] > 0:
        oracle = direct_image_coverage(f, a, report.r, report.v, report.m, p["grid_cells"],
                                       p["oracle_points"], seed=config.seed,
                                       cell_fraction=p["cell_fraction"])
        results["direct_image"] = {"cells_total": oracle.cells_total, "cells_hit": oracle.cells_hit}

    sampler = SamplerConfig(step_dt=p["step_scale"] * report.r * report.r,
                            boundary_tol=p["boundary_tol"], max_steps=p["max_steps"])
    results["dumped_paths"] = dump_sample_paths(config, a, CircleSpec(a, report.r), sampler)
    if config.dump_gamma is not None:
        gamma = build_gamma(f, a, report.r, report.v, K=p["gamma_samples"])
        results["dumped_gamma"] = str(write_gamma_csv(gamma.thetas, gamma.points, config.dump_gamma))

    summary = [
        ("r", f"{report.r:.6g}"),
        ("m", f"{report.m:.6g}"),
        ("crossing violations", str(report.crossing_violations)),
        ("ambiguous paths", str(report.ambiguous_paths)),
        ("cells hit", f"{report.cells_hit}/{report.cells_total}"),
    ]
    return CommandResult(results=results, verdicts={"containment": verdict}, summary=summary)
