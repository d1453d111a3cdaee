"""
Time change of a sampled path under an analytic map.

The clock sigma(t) = int_0^t |f'(B_s)|^2 ds is integrated along the path
with the trapezoid rule. Its generalized inverse C(s) = inf{t : sigma(t) >= s}
reparameterizes the image f(B): evaluated on a uniform grid of image times,
f(B_{C(s)}) is a discrete sample of Brownian motion started at f(B_0).
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .analytic import AnalyticFn, deriv, evaluate
from .brownian import BmPath
from .errors import ClockRangeError, ContractError, DegenerateClockError
from .geometry import segment_circle_parameter
from .settings import get_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClockTable:
    """sigma[k] is the clock value at times[k]; sigma is nondecreasing, sigma[0] = 0."""

    times: np.ndarray
    sigma: np.ndarray

    @property
    def sigma_end(self) -> float:
        return float(self.sigma[-1])


@dataclass(frozen=True)
class ImagePath:
    """
    Image path f(B_{C(s_k)}) on the uniform grid s_k = k * image_step.

    The grid never exceeds sigma_end; terminal_point = f(B_tau) sits at
    image time sigma_end and closes the polyline.
    """

    image_times: np.ndarray
    points: np.ndarray
    terminal_point: complex
    terminal_image_time: float

    def polyline(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid points followed by the terminal point, with their image times."""
        if self.image_times[-1] == self.terminal_image_time and self.points[-1] == self.terminal_point:
            return self.image_times, self.points
        times = np.append(self.image_times, self.terminal_image_time)
        points = np.append(self.points, self.terminal_point)
        return times, points


class Crossing(NamedTuple):
    image_time: float
    point: complex
    segment: int


def _speed(f_prime: AnalyticFn, points: np.ndarray) -> np.ndarray:
    values = evaluate(f_prime, points)
    return values.real * values.real + values.imag * values.imag


def compute_clock(path: BmPath, f: AnalyticFn) -> ClockTable:
    """
    Trapezoid clock: sigma[k] = sigma[k-1] + dt_k * (|f'(B_{k-1})|^2 + |f'(B_k)|^2) / 2.

    Args:
        path: Stopped path
        f: Analytic map

    Returns:
        ClockTable aligned with the path's time stamps
    """
    last = path.exit_index if path.stopped else len(path) - 1
    times = path.times[: last + 1]
    density = _speed(deriv(f), path.points[: last + 1])
    increments = np.diff(times) * (density[:-1] + density[1:]) / 2.0
    sigma = np.concatenate(([0.0], np.cumsum(increments)))
    return ClockTable(times=times, sigma=sigma)


def _locate(clock: ClockTable, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Knot index k and fraction in segment k-1 -> k for each clock value s."""
    sigma = clock.sigma
    index = np.searchsorted(sigma, s, side="left")
    index = np.clip(index, 0, len(sigma) - 1)
    lower = np.maximum(index - 1, 0)
    width = sigma[index] - sigma[lower]
    with np.errstate(divide="ignore", invalid="ignore"):
        fraction = np.where(width > 0, (s - sigma[lower]) / width, 1.0)
    # an exact knot hit returns the knot itself (the infimum)
    fraction = np.where(sigma[index] == s, 1.0, fraction)
    return index, np.clip(fraction, 0.0, 1.0)


def clock_inverse(clock: ClockTable, s: float) -> float:
    """
    C(s) = inf{t >= 0 : sigma(t) >= s}, with sigma interpolated linearly.

    On flat stretches of the clock the left endpoint is returned.

    Raises:
        ClockRangeError: If s is outside [0, sigma_end]
    """
    if not (0.0 <= s <= clock.sigma_end):
        raise ClockRangeError(f"clock value {s!r} outside [0, {clock.sigma_end!r}]")
    index, fraction = _locate(clock, np.asarray([s], dtype=float))
    k, u = int(index[0]), float(fraction[0])
    if k == 0:
        return float(clock.times[0])
    if u == 1.0:
        return float(clock.times[k])
    return float(clock.times[k - 1] + u * (clock.times[k] - clock.times[k - 1]))


def map_path(
    path: BmPath,
    f: AnalyticFn,
    image_step: Optional[float] = None,
    clock: Optional[ClockTable] = None
) -> ImagePath:
    """
    Image of a path under f, resampled on a uniform image-time grid.

    B is interpolated linearly between samples at t = C(s_k) and mapped
    through f. The default image_step is sigma_end / image_steps.

    Args:
        path: Stopped path
        f: Nonconstant analytic map
        image_step: Spacing of the image-time grid
        clock: Precomputed clock of this path (computed when omitted)

    Raises:
        DegenerateClockError: If the clock never advances along the path
        ContractError: If image_step is not positive
    """
    if clock is None:
        clock = compute_clock(path, f)
    sigma_end = clock.sigma_end
    if not sigma_end > 0:
        raise DegenerateClockError("clock is flat along the whole path (|f'| = 0 at every sample)")
    if image_step is None:
        image_step = sigma_end / get_settings().image_steps
    if not (math.isfinite(image_step) and image_step > 0):
        raise ContractError(f"image_step must be positive, got {image_step!r}")

    # absorb rounding so that sigma_end / image_steps gives exactly image_steps intervals
    count = int(math.floor(sigma_end / image_step * (1.0 + 1e-12)))
    grid = np.minimum(image_step * np.arange(count + 1, dtype=float), sigma_end)

    index, fraction = _locate(clock, grid)
    points = clock_points(path, index, fraction)
    last = path.exit_index if path.stopped else len(path) - 1
    return ImagePath(
        image_times=grid,
        points=evaluate(f, points),
        terminal_point=evaluate(f, path.points[last]),
        terminal_image_time=sigma_end
    )


def clock_points(path: BmPath, index: np.ndarray, fraction: np.ndarray) -> np.ndarray:
    """Path points interpolated linearly at the located clock positions."""
    lower = np.maximum(index - 1, 0)
    start, end = path.points[lower], path.points[index]
    between = np.where(fraction == 1.0, end, start + fraction * (end - start))
    return np.where(index == 0, path.points[0], between)


def first_crossing(image: ImagePath, center: complex, radius: float) -> Optional[Crossing]:
    """
    First time the image polyline reaches the circle {|w - center| = radius}.

    The crossing point is the intersection of the first segment whose
    endpoints straddle the circle with the circle itself; its image time is
    interpolated along that segment. A start point on the circle crosses at
    image time 0.

    Returns:
        Crossing(image_time, point, segment) or None if the circle is never reached
    """
    if not radius > 0:
        raise ContractError(f"crossing radius must be positive, got {radius!r}")
    center = complex(center)
    times, points = image.polyline()
    distance = np.abs(points - center) - radius
    eps = 1e-12 * radius
    if abs(distance[0]) <= eps:
        return Crossing(float(times[0]), complex(points[0]), 0)

    # points within eps of the circle count as reaching it
    inside = distance[0] < 0
    changed = (distance >= -eps) if inside else (distance <= eps)
    if not changed.any():
        return None
    k = int(np.argmax(changed))
    p, q = complex(points[k - 1]), complex(points[k])
    t = segment_circle_parameter(p, q, center, radius)
    if t is None:
        t = 1.0
    point = p + t * (q - p)
    image_time = float(times[k - 1] + t * (times[k] - times[k - 1]))
    return Crossing(image_time, point, k)
