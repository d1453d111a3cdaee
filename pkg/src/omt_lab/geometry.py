"""
Segment and circle geometry shared by the sampler and the time change.
"""

import math
from typing import Optional

import numpy as np


def segment_circle_parameter(p: complex, q: complex, center: complex, radius: float) -> Optional[float]:
    """
    Smallest t in [0, 1] with |p + t*(q - p) - center| = radius.

    Returns:
        The parameter t, or None when the segment never meets the circle
    """
    d = q - p
    w = p - center
    a = d.real * d.real + d.imag * d.imag
    c = w.real * w.real + w.imag * w.imag - radius * radius
    if a == 0.0:
        return 0.0 if c == 0.0 else None
    b = 2.0 * (w.real * d.real + w.imag * d.imag)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    # numerically stable pair of roots
    root = math.sqrt(disc)
    half = -0.5 * (b + math.copysign(root, b))
    roots = sorted([half / a, c / half] if half != 0.0 else [0.0, 0.0])
    for t in roots:
        if 0.0 <= t <= 1.0:
            return t
    # rounding may push a genuine crossing just outside [0, 1]
    for t in roots:
        if -1e-12 <= t <= 1.0 + 1e-12:
            return min(max(t, 0.0), 1.0)
    return None


def project_to_circle(z: complex, center: complex, radius: float) -> complex:
    """Radial projection of z onto the circle; z must differ from center."""
    offset = z - center
    return center + radius * offset / abs(offset)


def normalize_angle(theta):
    """Map angles to [0, 2*pi); works on scalars and arrays."""
    two_pi = 2.0 * math.pi
    wrapped = np.mod(theta, two_pi)
    # np.mod can return exactly 2*pi for tiny negative inputs
    wrapped = np.where(wrapped >= two_pi, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped
