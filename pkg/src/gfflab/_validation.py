"""Input validation helpers shared by the numeric modules."""

import math
import numbers

import numpy as np

from .exceptions import (
    DomainError,
    GammaRangeError,
    InvalidConfigError,
    NonPositiveRadiusError,
)

# slack for containment tests so that e.g. S((0.5, 0.5), 1) counts as inside
_EDGE_TOL = 1e-12


def check_positive_int(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, numbers.Integral):
        raise InvalidConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, numbers.Integral):
        raise InvalidConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise InvalidConfigError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return int(seed)


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def as_points(z):
    """Return ``(points, scalar)`` with points shaped ``(m, 2)``.

    Accepts a single point (tuple, complex number or length-2 array) or an
    array of points.
    """
    if isinstance(z, complex):
        z = (z.real, z.imag)
    arr = np.asarray(z, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != 2:
            raise InvalidConfigError(f"a point needs two coordinates, got shape {arr.shape}")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidConfigError(f"points must have shape (m, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidConfigError("points must be finite")
    return arr, False


def check_in_square(points):
    if np.any(points < -_EDGE_TOL) or np.any(points > 1 + _EDGE_TOL):
        bad = points[np.any((points < -_EDGE_TOL) | (points > 1 + _EDGE_TOL), axis=1)][0]
        raise DomainError(f"point {tuple(bad)} lies outside the closed unit square")


def check_radius(r, name="r"):
    r = float(r)
    if not math.isfinite(r) or r <= 0:
        raise NonPositiveRadiusError(f"{name} must be positive and finite, got {r}")
    return r


def check_disk_inside(points, r):
    """Reject disks D(z, r) that leave the closed unit square."""
    room = np.minimum(np.minimum(points[:, 0], 1 - points[:, 0]),
                      np.minimum(points[:, 1], 1 - points[:, 1]))
    if np.any(room < r - _EDGE_TOL):
        bad = points[np.argmin(room - r)]
        raise DomainError(f"disk of radius {r} at {tuple(bad)} escapes the unit square")


def check_square_inside(points, side):
    check_disk_inside(points, side / 2)


def check_gamma(gamma):
    gamma = float(gamma)
    if not 0 <= gamma < 2:
        raise GammaRangeError(f"gamma must lie in [0, 2), got {gamma}")
    return gamma
