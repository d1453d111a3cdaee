"""
The open-mapping experiment.

Given a nonconstant f and a point a of a disk W, the experiment picks a
radius r with f != v = f(a) on the circle |z - a| = r, builds the image
curve gamma = f(circle) with its distance m to v, and pushes stopped
Brownian paths from a through the time change. Every image path starts at
v and ends on gamma, so it must cross |w - v| = m before it ends; the
experiment checks that claim path by path and records which grid cells of
D(v, m) the image paths visit before their crossing.

The verdict certifies cell coverage of D(v, cell_fraction * m), a finite
stand-in for the inclusion D(v, m) in f(closed disk).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import AnalyticFn, CircleSpec, deriv, evaluate, is_nonconstant, min_on_circle
from .brownian import RngStream, SamplerConfig, sample_path_until_exit
from .errors import (
    ContractError,
    DegenerateMarginError,
    GeometryError,
    NonconstantRequiredError,
    OmtLabError,
    RadiusSelectionError,
)
from .parallel import map_paths
from .settings import get_settings
from .time_change import first_crossing, map_path

logger = logging.getLogger(__name__)

_DIRECT_CHUNK = 100_000


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class DomainSpec:
    """The open set W, represented as the open disk D(center, radius)."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ContractError(f"domain radius must be positive, got {self.radius!r}")

    def contains(self, z: complex) -> bool:
        return abs(complex(z) - self.center) < self.radius

    def boundary_distance(self, z: complex) -> float:
        return self.radius - abs(complex(z) - self.center)

    def contains_closed_disk(self, a: complex, r: float) -> bool:
        """True if the closed disk of radius r around a lies inside W."""
        return abs(complex(a) - self.center) + r < self.radius


@dataclass(frozen=True)
class GammaCurve:
    """
    K samples of gamma = f({|z - a| = r}) and its distance m to v.

    `tolerance` bounds how far any point of gamma lies from the closed
    sample polyline, and how far m may sit above the true minimum.
    """

    circle: CircleSpec
    v: complex
    thetas: np.ndarray
    points: np.ndarray
    m: float
    argmin_angle: float
    tolerance: float
    derivative_bound: float

    @property
    def K(self) -> int:
        return len(self.points)

    def distance_to(self, w: complex) -> float:
        """Distance from w to the closed polyline through the samples."""
        start = self.points
        step = np.roll(self.points, -1) - start
        offset = complex(w) - start
        length2 = step.real * step.real + step.imag * step.imag
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(length2 > 0, (offset.real * step.real + offset.imag * step.imag) / length2, 0.0)
        t = np.clip(t, 0.0, 1.0)
        return float(np.min(np.abs(offset - t * step)))


@dataclass(frozen=True)
class CoverageGrid:
    """
    cells x cells grid over the square [v - m, v + m]^2, row-major with
    rows along the imaginary axis. A cell is eligible when all four of its
    corners lie strictly inside D(v, cell_fraction * m).
    """

    v: complex
    m: float
    cells: int
    cell_fraction: float
    eligible: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.cells < 1:
            raise ContractError(f"grid needs at least one cell per axis, got {self.cells}")
        if not self.m > 0:
            raise ContractError(f"grid half-width must be positive, got {self.m!r}")
        edges = np.arange(self.cells + 1, dtype=float) * self.cell_size
        x0, y0 = self.origin.real, self.origin.imag
        corner = np.abs((x0 + edges)[None, :] + 1j * (y0 + edges)[:, None] - self.v)
        limit = self.cell_fraction * self.m
        inside = corner < limit
        eligible = inside[:-1, :-1] & inside[:-1, 1:] & inside[1:, :-1] & inside[1:, 1:]
        object.__setattr__(self, "eligible", eligible.ravel())

    @property
    def origin(self) -> complex:
        return complex(self.v) - self.m * (1 + 1j)

    @property
    def cell_size(self) -> float:
        return 2.0 * self.m / self.cells

    @property
    def cells_total(self) -> int:
        return int(np.count_nonzero(self.eligible))

    def cell_center(self, flat_index: int) -> complex:
        row, col = divmod(int(flat_index), self.cells)
        return self.origin + self.cell_size * complex(col + 0.5, row + 0.5)

    def visited(self, points: np.ndarray) -> np.ndarray:
        """Sorted flat indices of the eligible cells containing any of the points."""
        points = np.asarray(points, dtype=np.complex128)
        col = np.floor((points.real - self.origin.real) / self.cell_size)
        row = np.floor((points.imag - self.origin.imag) / self.cell_size)
        valid = (col >= 0) & (col < self.cells) & (row >= 0) & (row < self.cells)
        flat = (row[valid] * self.cells + col[valid]).astype(np.int64)
        flat = flat[self.eligible[flat]]
        return np.unique(flat)

    def metadata(self) -> dict:
        return {
            "rows": self.cells,
            "cols": self.cells,
            "order": "row-major",
            "origin": {"re": self.origin.real, "im": self.origin.imag},
            "cell_size": self.cell_size,
            "cell_fraction": self.cell_fraction,
            "eligible": [int(flag) for flag in self.eligible],
        }


@dataclass(frozen=True)
class OmtConfig:
    """
    Inputs of one experiment run; unset numeric fields take their
    defaults from LabSettings.
    """

    f: AnalyticFn
    a: complex
    W: DomainSpec
    n_paths: int
    grid_cells: Optional[int] = None
    sampler: Optional[SamplerConfig] = None
    seed: int = 0
    r0: Optional[float] = None
    gamma_samples: Optional[int] = None
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        if not self.W.contains(self.a):
            raise GeometryError(f"a = {self.a} is not inside W = D({self.W.center}, {self.W.radius})")
        if self.n_paths < 1:
            raise ContractError(f"n_paths must be at least 1, got {self.n_paths}")


@dataclass(frozen=True)
class OmtReport:
    """Aggregated outcome of run_experiment."""

    r: float
    v: complex
    m: float
    paths_run: int
    crossing_violations: int
    terminal_margin_min: Optional[float]
    cells_total: int
    cells_hit: int
    per_cell_hit_counts: np.ndarray
    grid: CoverageGrid
    ambiguous_paths: int = 0
    path_errors: int = 0
    gamma_violations: int = 0
    tolerance: float = 0.0
    gamma_tolerance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "v": {"re": self.v.real, "im": self.v.imag},
            "m": self.m,
            "paths_run": self.paths_run,
            "crossing_violations": self.crossing_violations,
            "ambiguous_paths": self.ambiguous_paths,
            "path_errors": self.path_errors,
            "gamma_violations": self.gamma_violations,
            "terminal_margin_min": self.terminal_margin_min,
            "tolerance": self.tolerance,
            "gamma_tolerance": self.gamma_tolerance,
            "cells_total": self.cells_total,
            "cells_hit": self.cells_hit,
            "per_cell_hit_counts": {
                **self.grid.metadata(),
                "counts": [int(count) for count in self.per_cell_hit_counts.ravel()],
            },
        }


@dataclass(frozen=True)
class CoverageResult:
    cells_total: int
    cells_hit: int
    counts: np.ndarray


@dataclass(frozen=True)
class _PathOutcome:
    error: Optional[str] = None
    cells: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    terminal_distance: float = 0.0
    crossing_time: Optional[float] = None
    terminal_time: float = 0.0
    gamma_distance: float = 0.0


# ============================================================================
# RADIUS AND GAMMA
# ============================================================================

def select_radius(
    f: AnalyticFn,
    a: complex,
    W: DomainSpec,
    v: Optional[complex] = None,
    r0: Optional[float] = None,
    margin_tol: Optional[float] = None,
    max_halvings: Optional[int] = None,
    K: Optional[int] = None
) -> float:
    """
    Find r with min |f - v| > margin_tol on |z - a| = r and the closed disk in W.

    Starting from r0 (default: half the distance from a to the boundary of
    W), r is halved until the margin test passes.

    Args:
        f: Nonconstant analytic function
        a: Center point, strictly inside W
        W: Domain disk
        v: Target value (default f(a))
        r0: Starting radius
        margin_tol: Smallest accepted margin
        max_halvings: Halvings tried after r0
        K: Circle samples of the margin test

    Returns:
        The first passing radius

    Raises:
        NonconstantRequiredError: If f is constant
        GeometryError: If a is not inside W or r0 leaves W
        RadiusSelectionError: If every halving fails
    """
    settings = get_settings()
    margin_tol = settings.margin_tol if margin_tol is None else margin_tol
    max_halvings = settings.max_halvings if max_halvings is None else max_halvings
    K = settings.circle_samples if K is None else K

    if not is_nonconstant(f):
        raise NonconstantRequiredError("nonconstant required: f is constant")
    a = complex(a)
    if not W.contains(a):
        raise GeometryError(f"a = {a} is not inside W = D({W.center}, {W.radius})")
    v = evaluate(f, a) if v is None else complex(v)

    r = W.boundary_distance(a) / 2.0 if r0 is None else float(r0)
    if not (math.isfinite(r) and r > 0):
        raise GeometryError(f"starting radius must be positive, got {r0!r}")
    if not W.contains_closed_disk(a, r):
        raise GeometryError(f"closed disk of radius {r} around {a} is not inside W")

    for halving in range(max_halvings + 1):
        m = min_on_circle(f, CircleSpec(a, r), v, K).m
        logger.debug(f"Radius search step {halving}: r={r:.6g} m={m:.6g}")
        if m > margin_tol:
            return r
        r /= 2.0
    raise RadiusSelectionError(
        f"no radius with margin above {margin_tol} after {max_halvings} halvings from a = {a}"
    )


def build_gamma(
    f: AnalyticFn,
    a: complex,
    r: float,
    v: complex,
    K: Optional[int] = None,
    margin_tol: Optional[float] = None
) -> GammaCurve:
    """
    Sample gamma = f({|z - a| = r}) at K uniform angles and find m.

    Raises:
        ContractError: If K < 256
        DegenerateMarginError: If m <= margin_tol
    """
    settings = get_settings()
    K = settings.gamma_samples if K is None else K
    margin_tol = settings.margin_tol if margin_tol is None else margin_tol
    if K < 256:
        raise ContractError(f"gamma curve needs K >= 256 samples, got {K}")

    circle = CircleSpec(a, r)
    thetas = 2.0 * math.pi * np.arange(K) / K
    points = evaluate(f, circle.point(thetas))
    minimum = min_on_circle(f, circle, v, K)
    if not minimum.m > margin_tol:
        raise DegenerateMarginError(
            f"margin m = {minimum.m:.3g} is not above {margin_tol} on |z - {circle.center}| = {r}"
        )
    derivative_bound = float(np.max(np.abs(evaluate(deriv(f), circle.point(thetas)))))
    return GammaCurve(
        circle=circle,
        v=complex(v),
        thetas=thetas,
        points=points,
        m=minimum.m,
        argmin_angle=minimum.argmin_angle,
        tolerance=minimum.tolerance,
        derivative_bound=derivative_bound
    )


# ============================================================================
# EXPERIMENT
# ============================================================================

def run_experiment(cfg: OmtConfig) -> OmtReport:
    """
    Run the crossing and coverage experiment.

    Path k uses RngStream(cfg.seed, k), so a larger n_paths on the same
    seed only adds paths. Per-path sampler and clock failures are counted
    in path_errors and do not stop the run.

    Args:
        cfg: Experiment configuration

    Returns:
        OmtReport with crossing, margin and coverage statistics
    """
    settings = get_settings()
    grid_cells = cfg.grid_cells or settings.grid_cells
    f, a = cfg.f, cfg.a
    v = evaluate(f, a)

    r = select_radius(f, a, cfg.W, v=v, r0=cfg.r0)
    gamma = build_gamma(f, a, r, v, K=cfg.gamma_samples)
    m = gamma.m
    circle = gamma.circle
    sampler = cfg.sampler or SamplerConfig.for_radius(r)

    # f(exit point) sits on gamma up to the boundary tolerance of the exit point
    edge = sampler.boundary_tol * max(gamma.derivative_bound, 1.0)
    tolerance = gamma.tolerance + edge
    gamma_tolerance = 2.0 * gamma.tolerance + edge
    grid = CoverageGrid(v, m, grid_cells, settings.cell_fraction)

    logger.info("=" * 60)
    logger.info(f"OMT experiment: a={a} v={v} r={r:.6g} m={m:.6g} paths={cfg.n_paths}")
    logger.info(f"Coverage grid {grid_cells}x{grid_cells}, {grid.cells_total} eligible cells")
    logger.info("=" * 60)

    def task(index: int) -> _PathOutcome:
        try:
            path = sample_path_until_exit(a, circle, sampler, RngStream(cfg.seed, index))
            image = map_path(path, f)
        except OmtLabError as e:
            return _PathOutcome(error=f"{type(e).__name__}: {e}")
        crossing = first_crossing(image, v, m)
        _, points = image.polyline()
        before = points if crossing is None else points[: crossing.segment]
        return _PathOutcome(
            cells=grid.visited(before),
            terminal_distance=abs(image.terminal_point - v),
            crossing_time=None if crossing is None else crossing.image_time,
            terminal_time=image.terminal_image_time,
            gamma_distance=gamma.distance_to(image.terminal_point)
        )

    outcomes = map_paths(task, cfg.n_paths, cfg.threads)

    counts = np.zeros(grid_cells * grid_cells, dtype=np.int64)
    violations = ambiguous = errors = gamma_violations = 0
    margin_min: Optional[float] = None
    for outcome in outcomes:
        if outcome.error is not None:
            errors += 1
            if errors <= 3:
                logger.warning(f"Path failed: {outcome.error}")
            continue
        counts[outcome.cells] += 1
        margin = outcome.terminal_distance - m
        margin_min = margin if margin_min is None else min(margin_min, margin)
        if outcome.gamma_distance > gamma_tolerance:
            gamma_violations += 1
        if abs(margin) <= tolerance:
            ambiguous += 1
        elif margin > tolerance:
            crossed = outcome.crossing_time is not None and outcome.crossing_time <= outcome.terminal_time
            if not crossed:
                violations += 1

    if errors:
        logger.warning(f"{errors} of {cfg.n_paths} paths failed and were skipped")
    cells_hit = int(np.count_nonzero(counts[grid.eligible]))
    logger.info(
        f"Crossing violations: {violations}, ambiguous: {ambiguous}, "
        f"cells hit: {cells_hit}/{grid.cells_total}"
    )
    return OmtReport(
        r=r,
        v=v,
        m=m,
        paths_run=cfg.n_paths,
        crossing_violations=violations,
        terminal_margin_min=margin_min,
        cells_total=grid.cells_total,
        cells_hit=cells_hit,
        per_cell_hit_counts=counts.reshape(grid_cells, grid_cells),
        grid=grid,
        ambiguous_paths=ambiguous,
        path_errors=errors,
        gamma_violations=gamma_violations,
        tolerance=tolerance,
        gamma_tolerance=gamma_tolerance
    )


def containment_check(report: OmtReport) -> bool:
    """True iff no crossing violations, terminal margins >= -tolerance and every eligible cell hit."""
    if report.terminal_margin_min is None:
        return False
    return (
        report.crossing_violations == 0
        and report.terminal_margin_min >= -report.tolerance
        and report.cells_hit == report.cells_total
    )


def direct_image_coverage(
    f: AnalyticFn,
    a: complex,
    r: float,
    v: complex,
    m: float,
    grid_cells: int,
    n: int,
    seed: int = 0,
    cell_fraction: Optional[float] = None
) -> CoverageResult:
    """
    Map n uniform points of the closed disk D(a, r) through f and count
    them per eligible grid cell of D(v, m).
    """
    cell_fraction = get_settings().cell_fraction if cell_fraction is None else cell_fraction
    grid = CoverageGrid(complex(v), m, grid_cells, cell_fraction)
    generator = RngStream(seed, 0).generator()
    counts = np.zeros(grid_cells * grid_cells, dtype=np.int64)
    remaining = n
    while remaining > 0:
        size = min(remaining, _DIRECT_CHUNK)
        radius = r * np.sqrt(generator.random(size))
        angle = 2.0 * math.pi * generator.random(size)
        images = evaluate(f, complex(a) + radius * np.exp(1j * angle))
        col = np.floor((images.real - grid.origin.real) / grid.cell_size)
        row = np.floor((images.imag - grid.origin.imag) / grid.cell_size)
        valid = (col >= 0) & (col < grid_cells) & (row >= 0) & (row < grid_cells)
        flat = (row[valid] * grid_cells + col[valid]).astype(np.int64)
        counts += np.bincount(flat, minlength=grid_cells * grid_cells)
        remaining -= size
    counts[~grid.eligible] = 0
    return CoverageResult(
        cells_total=grid.cells_total,
        cells_hit=int(np.count_nonzero(counts)),
        counts=counts.reshape(grid_cells, grid_cells)
    )
