"""
Planar Brownian motion stopped at the exit time of a disk.

Paths are sampled with exact Gaussian increments on a fixed time grid. On
the first step that leaves the disk, the exit point is the intersection of
that step with the circle and the exit time is interpolated linearly along
the step, so exit positions carry no overshoot bias.

Randomness is split per path: an RngStream (seed, stream_id) seeds a numpy
SeedSequence, and distinct stream ids give independent generators. Using
the path index as stream id makes parallel sampling reproducible.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analytic import CircleSpec
from .errors import BudgetExceededError, ContractError, GeometryError
from .geometry import normalize_angle, project_to_circle, segment_circle_parameter
from .settings import LabSettings, get_settings

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1
_MAX_CHUNK = 1 << 16

# Vectorized membership test: complex ndarray -> bool ndarray
Region = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream; (seed, stream_id) determines all output."""

    seed: int
    stream_id: int

    def __post_init__(self):
        if self.stream_id < 0:
            raise ContractError(f"stream_id must be nonnegative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.default_rng(np.random.SeedSequence([self.seed & _SEED_MASK, self.stream_id]))


@dataclass(frozen=True)
class SamplerConfig:
    """Time step, boundary tolerance and step budget of the sampler."""

    step_dt: float
    boundary_tol: float = 1e-9
    max_steps: int = 1_000_000
    chunk_steps: int = 4096

    def __post_init__(self):
        if not (math.isfinite(self.step_dt) and self.step_dt > 0):
            raise ContractError(f"step_dt must be positive, got {self.step_dt!r}")
        if not self.boundary_tol > 0:
            raise ContractError(f"boundary_tol must be positive, got {self.boundary_tol!r}")
        if self.max_steps < 1 or self.chunk_steps < 1:
            raise ContractError("max_steps and chunk_steps must be positive")

    @classmethod
    def for_radius(cls, radius: float, settings: Optional[LabSettings] = None) -> "SamplerConfig":
        """Scale-aware default: step_dt = step_scale * radius^2."""
        settings = settings or get_settings()
        return cls(
            step_dt=settings.step_dt(radius),
            boundary_tol=settings.boundary_tol,
            max_steps=settings.max_steps
        )

    def to_dict(self) -> dict:
        return {
            "step_dt": self.step_dt,
            "boundary_tol": self.boundary_tol,
            "max_steps": self.max_steps,
            "chunk_steps": self.chunk_steps,
        }


@dataclass(frozen=True)
class BmPath:
    """
    A time-stamped planar path stopped at a circle.

    times[0] = 0, points[0] is the start point, points before exit_index lie
    strictly inside the stopping disk and points[exit_index] is on its
    circle. A partial path (budget exceeded) has exit_index = -1.
    """

    times: np.ndarray
    points: np.ndarray
    exit_index: int

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def exit_point(self) -> complex:
        return complex(self.points[self.exit_index])

    @property
    def exit_time(self) -> float:
        return float(self.times[self.exit_index])

    @property
    def stopped(self) -> bool:
        return self.exit_index >= 0

    def __len__(self) -> int:
        return len(self.points)


def sample_path_until_exit(
    start: complex,
    circle: CircleSpec,
    cfg: SamplerConfig,
    rng: RngStream
) -> BmPath:
    """
    Sample Brownian motion from `start` until it reaches `circle`.

    Args:
        start: Start point, strictly inside the circle
        circle: Stopping circle {|z - a| = r}
        cfg: Sampler configuration
        rng: Random stream of this path

    Returns:
        BmPath whose last point lies on the circle

    Raises:
        GeometryError: If start is not strictly inside the circle
        BudgetExceededError: If max_steps pass without reaching the circle;
            the error carries the partial path
    """
    start = complex(start)
    if not circle.contains(start):
        raise GeometryError(f"start {start} is not strictly inside {circle}")

    center, radius = circle.center, circle.radius
    generator = rng.generator()
    scale = math.sqrt(cfg.step_dt)

    chunks = [np.array([start], dtype=np.complex128)]
    current = start
    taken = 0
    chunk = min(cfg.chunk_steps, cfg.max_steps)

    while taken < cfg.max_steps:
        size = min(chunk, cfg.max_steps - taken)
        increments = generator.standard_normal((size, 2)) * scale
        positions = current + np.cumsum(increments[:, 0] + 1j * increments[:, 1])
        outside = np.abs(positions - center) >= radius
        if outside.any():
            k = int(np.argmax(outside))
            previous = complex(positions[k - 1]) if k > 0 else current
            t = segment_circle_parameter(previous, complex(positions[k]), center, radius)
            if t is None or t == 0.0:
                # previous is strictly inside and positions[k] is not
                t = 1.0
            exit_point = project_to_circle(previous + t * (positions[k] - previous), center, radius)
            chunks.append(positions[:k])
            chunks.append(np.array([exit_point], dtype=np.complex128))
            points = np.concatenate(chunks)
            exit_index = len(points) - 1
            times = cfg.step_dt * np.arange(len(points), dtype=float)
            times[exit_index] = cfg.step_dt * (exit_index - 1 + t)
            return BmPath(times=times, points=points, exit_index=exit_index)

        chunks.append(positions)
        current = complex(positions[-1])
        taken += size
        chunk = min(chunk * 2, _MAX_CHUNK)

    points = np.concatenate(chunks)
    partial = BmPath(
        times=cfg.step_dt * np.arange(len(points), dtype=float),
        points=points,
        exit_index=-1
    )
    raise BudgetExceededError(
        f"Path did not reach {circle} within {cfg.max_steps} steps (step_dt={cfg.step_dt})",
        partial_path=partial
    )


def exit_angle(path: BmPath, circle: CircleSpec, boundary_tol: float = 1e-9) -> float:
    """
    Angle of the exit point around the circle center, in [0, 2*pi).

    Raises:
        ContractError: If the path is not stopped on this circle
    """
    if not path.stopped:
        raise ContractError("path is not stopped (partial path)")
    offset = path.exit_point - circle.center
    if abs(abs(offset) - circle.radius) > boundary_tol * max(1.0, circle.radius):
        raise ContractError(
            f"path exit point {path.exit_point} is not on the circle {circle}"
        )
    return normalize_angle(math.atan2(offset.imag, offset.real))


def first_hit_of_set(path: BmPath, predicate: Region) -> Optional[int]:
    """
    Smallest sampled index up to the exit index whose point satisfies
    `predicate`, or None. Only sampled points are inspected.
    """
    last = path.exit_index if path.stopped else len(path) - 1
    mask = np.asarray(predicate(path.points[: last + 1]), dtype=bool)
    if not mask.any():
        return None
    return int(np.argmax(mask))


# ============================================================================
# REGIONS
# ============================================================================

@dataclass(frozen=True)
class DiskRegion:
    """Open disk D(center, radius) as a vectorized membership test."""

    center: complex
    radius: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(points) - self.center) < self.radius


def disk_region(center: complex, radius: float) -> DiskRegion:
    if radius <= 0:
        raise ContractError(f"region radius must be positive, got {radius}")
    return DiskRegion(complex(center), float(radius))


def WHOLE_PLANE(points: np.ndarray) -> np.ndarray:
    return np.ones(np.shape(points), dtype=bool)


def EMPTY_SET(points: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(points), dtype=bool)
