"""
Hitting-probability estimators and angular hypothesis tests.

The arc estimator samples Brownian paths from the center of a circle,
stops them at an inner circle of radius r' and counts exits inside an
open angular window; by rotation invariance the exit law is uniform, so
the reference value is the window's share of the full turn. The open-set
estimator counts paths whose sampled points enter a region before exit.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .analytic import CircleSpec
from .brownian import (
    Region,
    RngStream,
    SamplerConfig,
    exit_angle,
    first_hit_of_set,
    sample_path_until_exit,
)
from .errors import ContractError, GeometryError
from .geometry import normalize_angle
from .parallel import map_paths
from .special import chi_square_sf, wilson_interval

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ArcSpec:
    """The open arc {center + arc_radius * e^{i*theta} : theta1 < theta < theta2}."""

    center: complex
    arc_radius: float
    theta1: float
    theta2: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.arc_radius > 0:
            raise ContractError(f"arc radius must be positive, got {self.arc_radius!r}")
        width = self.theta2 - self.theta1
        if not (0.0 < width <= TWO_PI):
            raise ContractError(
                f"arc needs 0 < theta2 - theta1 <= 2*pi, got ({self.theta1!r}, {self.theta2!r})"
            )

    @property
    def width(self) -> float:
        return self.theta2 - self.theta1

    @property
    def is_full_circle(self) -> bool:
        return self.width >= TWO_PI

    @property
    def reference(self) -> float:
        """Exit probability through this window from the center."""
        return self.width / TWO_PI

    def rotated(self, phi: float) -> "ArcSpec":
        return ArcSpec(self.center, self.arc_radius, self.theta1 + phi, self.theta2 + phi)

    def contains_angles(self, angles) -> np.ndarray:
        """Open-window membership; a landing exactly on a window edge is a miss."""
        angles = np.asarray(angles, dtype=float)
        if self.is_full_circle:
            return np.ones(angles.shape, dtype=bool)
        offset = normalize_angle(angles - self.theta1)
        return (offset > 0.0) & (offset < self.width)


@dataclass(frozen=True)
class EstimateReport:
    """Hit count of n paths with a 95% Wilson interval."""

    n: int
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float
    reference: Optional[float] = None
    passed: Optional[bool] = None

    @classmethod
    def from_counts(cls, hits: int, n: int, reference: Optional[float] = None) -> "EstimateReport":
        """Build a report; with a reference, passing means it lies in the 3-standard-error band."""
        if not 0 <= hits <= n:
            raise ContractError(f"hits must lie in [0, n], got hits={hits}, n={n}")
        p_hat = hits / n
        ci_low, ci_high = wilson_interval(hits, n)
        passed = None
        if reference is not None:
            low, high = standard_error_band(p_hat, n, ci_low, ci_high)
            passed = bool(low <= reference <= high)
        return cls(n=n, hits=hits, p_hat=p_hat, ci_low=ci_low, ci_high=ci_high,
                   reference=reference, passed=passed)

    def to_dict(self) -> dict:
        return asdict(self)


class ChiSquareResult(NamedTuple):
    statistic: float
    p_value: float


class ExitSample(NamedTuple):
    angles: np.ndarray
    times: np.ndarray


@dataclass(frozen=True)
class ExitTimeReport:
    """Sample mean of exit times against (r^2 - |start - a|^2) / 2."""

    n: int
    mean: float
    std_error: float
    reference: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


# Discretization allowance of the exit-time calibration, as a share of the reference
EXIT_TIME_BIAS = 0.03


def standard_error_band(p_hat: float, n: int, ci_low: float, ci_high: float) -> tuple[float, float]:
    """Wilson interval widened to at least p_hat +/- 3 standard errors."""
    se = math.sqrt(p_hat * (1.0 - p_hat) / n)
    return min(ci_low, p_hat - 3.0 * se), max(ci_high, p_hat + 3.0 * se)


# ============================================================================
# SAMPLING
# ============================================================================

def sample_exits(
    start: complex,
    circle: CircleSpec,
    n: int,
    cfg: Optional[SamplerConfig] = None,
    seed: int = 0,
    first_stream: int = 0,
    threads: Optional[int] = None
) -> ExitSample:
    """
    Exit angles and exit times of n paths from `start` stopped at `circle`.
    Path k uses RngStream(seed, first_stream + k).
    """
    if n < 1:
        raise ContractError(f"need at least one path, got n={n}")
    cfg = cfg or SamplerConfig.for_radius(circle.radius)

    def task(index: int) -> tuple[float, float]:
        path = sample_path_until_exit(start, circle, cfg, RngStream(seed, first_stream + index))
        return exit_angle(path, circle, cfg.boundary_tol), path.exit_time

    results = map_paths(task, n, threads)
    angles = np.fromiter((angle for angle, _ in results), dtype=float, count=n)
    times = np.fromiter((time for _, time in results), dtype=float, count=n)
    return ExitSample(angles=angles, times=times)


def arc_report(angles: Sequence[float], arc: ArcSpec) -> EstimateReport:
    """EstimateReport of an arc window over already sampled exit angles."""
    angles = np.asarray(angles, dtype=float)
    hits = int(np.count_nonzero(arc.contains_angles(angles)))
    return EstimateReport.from_counts(hits, len(angles), reference=arc.reference)


def estimate_arc_first_hit(
    circle: CircleSpec,
    arc: ArcSpec,
    n: int,
    cfg: Optional[SamplerConfig] = None,
    seed: int = 0,
    first_stream: int = 0,
    threads: Optional[int] = None
) -> EstimateReport:
    """
    Probability that Brownian motion from the center first reaches the
    circle of radius r' through the arc window.

    Paths start at circle.center and are stopped at |z - a| = r'; a full
    window (theta2 - theta1 = 2*pi) counts every path.

    Args:
        circle: Outer circle {|z - a| = r}
        arc: Window on the inner circle, centered at a with 0 < r' < r
        n: Number of paths
        cfg: Sampler configuration (default: scale-aware for r')
        seed: Master seed; path k uses RngStream(seed, first_stream + k)

    Raises:
        GeometryError: If the arc is not centered at a or r' >= r
    """
    if arc.center != circle.center:
        raise GeometryError(f"arc center {arc.center} differs from circle center {circle.center}")
    if not arc.arc_radius < circle.radius:
        raise GeometryError(
            f"arc radius {arc.arc_radius} must be smaller than circle radius {circle.radius}"
        )
    inner = CircleSpec(circle.center, arc.arc_radius)
    sample = sample_exits(circle.center, inner, n, cfg, seed, first_stream, threads)
    report = arc_report(sample.angles, arc)
    logger.info(
        f"Arc ({arc.theta1:.6g}, {arc.theta2:.6g}) at r'={arc.arc_radius}: "
        f"p_hat={report.p_hat:.5f} reference={report.reference:.5f} over {n} paths"
    )
    return report


def estimate_open_set_hit(
    circle: CircleSpec,
    start: complex,
    predicate: Region,
    n: int,
    cfg: Optional[SamplerConfig] = None,
    seed: int = 0,
    first_stream: int = 0,
    threads: Optional[int] = None
) -> EstimateReport:
    """
    Share of n paths from `start` with a sampled point in the region before
    exiting `circle`. Only sampled points are tested, so the estimate is
    biased low for thin regions. Passing means at least one hit.
    """
    start = complex(start)
    if not circle.contains(start):
        raise GeometryError(f"start {start} is not strictly inside {circle}")
    if n < 1:
        raise ContractError(f"need at least one path, got n={n}")
    cfg = cfg or SamplerConfig.for_radius(circle.radius)

    def task(index: int) -> bool:
        path = sample_path_until_exit(start, circle, cfg, RngStream(seed, first_stream + index))
        return first_hit_of_set(path, predicate) is not None

    hits = sum(map_paths(task, n, threads))
    report = EstimateReport.from_counts(int(hits), n)
    return replace(report, passed=report.hits > 0)


def inscribed_arc(disk_center: complex, disk_radius: float, a: complex, r_prime: float) -> Optional[ArcSpec]:
    """
    Widest open arc of the circle |z - a| = r' lying inside D(disk_center, disk_radius).

    Its window share is a lower bound for the probability of entering the
    disk before exiting any circle around a larger than r'.

    Returns:
        ArcSpec, or None when the circle misses the disk
    """
    offset = complex(disk_center) - complex(a)
    d = abs(offset)
    if d == 0.0:
        return ArcSpec(complex(a), r_prime, 0.0, TWO_PI) if r_prime < disk_radius else None
    cosine = (r_prime * r_prime + d * d - disk_radius * disk_radius) / (2.0 * r_prime * d)
    if cosine >= 1.0:
        return None
    if cosine < -1.0:
        return ArcSpec(complex(a), r_prime, 0.0, TWO_PI)
    half = math.acos(cosine)
    phi = math.atan2(offset.imag, offset.real)
    return ArcSpec(complex(a), r_prime, phi - half, phi + half)


def estimate_exit_time(
    start: complex,
    circle: CircleSpec,
    times: Sequence[float]
) -> ExitTimeReport:
    """
    Calibration of sampled exit times against E[tau] = (r^2 - |start - a|^2) / 2.

    Passing allows 3 standard errors plus a 3% discretization allowance.
    """
    times = np.asarray(times, dtype=float)
    n = len(times)
    if n < 2:
        raise ContractError("exit-time calibration needs at least two paths")
    mean = float(np.mean(times))
    std_error = float(np.std(times, ddof=1) / math.sqrt(n))
    reference = (circle.radius ** 2 - abs(complex(start) - circle.center) ** 2) / 2.0
    passed = abs(mean - reference) <= 3.0 * std_error + EXIT_TIME_BIAS * reference
    return ExitTimeReport(n=n, mean=mean, std_error=std_error, reference=reference, passed=bool(passed))


# ============================================================================
# TESTS
# ============================================================================

def _bin_angles(angles: Sequence[float], bins: int) -> np.ndarray:
    scaled = np.asarray(normalize_angle(np.asarray(angles, dtype=float)), dtype=float) * bins / TWO_PI
    # angles sitting on a bin edge up to rounding belong to the upper bin
    index = np.floor(np.round(scaled, 9)).astype(int)
    return np.bincount(np.clip(index, 0, bins - 1), minlength=bins)


def chi_square_uniformity(angles: Sequence[float], bins: int) -> ChiSquareResult:
    """
    Pearson chi-square of angles in [0, 2*pi) against the uniform law.

    Raises:
        ContractError: If bins < 8 or fewer than 5 * bins angles are given
    """
    if bins < 8:
        raise ContractError(f"chi-square uniformity needs at least 8 bins, got {bins}")
    n = len(angles)
    if n < 5 * bins:
        raise ContractError(f"chi-square uniformity needs at least {5 * bins} angles, got {n}")
    observed = _bin_angles(angles, bins)
    expected = n / bins
    statistic = float(np.sum((observed - expected) ** 2) / expected)
    return ChiSquareResult(statistic, chi_square_sf(statistic, bins - 1))


def two_sample_angle_test(sample_a: Sequence[float], sample_b: Sequence[float], bins: int) -> ChiSquareResult:
    """
    Two-sample chi-square homogeneity test over equal-width angular bins.
    Bins empty in both samples are dropped.

    Raises:
        ContractError: If either sample has fewer than 5 * bins angles
    """
    if bins < 2:
        raise ContractError(f"two-sample test needs at least 2 bins, got {bins}")
    n_a, n_b = len(sample_a), len(sample_b)
    if n_a < 5 * bins or n_b < 5 * bins:
        raise ContractError(
            f"two-sample test needs at least {5 * bins} angles per sample, got {n_a} and {n_b}"
        )
    table = np.vstack([_bin_angles(sample_a, bins), _bin_angles(sample_b, bins)]).astype(float)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return ChiSquareResult(0.0, 1.0)
    total = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
    statistic = float(np.sum((table - expected) ** 2 / expected))
    return ChiSquareResult(statistic, chi_square_sf(statistic, table.shape[1] - 1))
