"""Conformal maps, image-disk geometry and the pullback disk-integral error.

The target domain is always ``V = [0,1]^2`` where the field lives; a map
``phi : U -> V`` pulls it back to ``F o phi`` on ``U``. Points are complex
numbers ``x + iy``.
"""

import math
import re
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import shapely
from shapely.geometry import Polygon

from . import rng
from ._validation import check_positive_int, check_radius, check_seed
from .exceptions import ClippingError, DomainError, InvalidConfigError
from .spectral import _modal_sum, disk_integral

MIN_RESOLUTION = 256
DEFAULT_RADIAL_ORDER = 64
DEFAULT_ANGULAR_ORDER = 128
_K_LO, _K_HI = 0.2, 0.8


class ConformalMap:
    """Analytic map with hand-coded derivative and inverse."""

    name = "map"

    def forward(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def inverse(self, w):
        raise NotImplementedError

    def inverse_derivative(self, w):
        return 1.0 / self.derivative(self.inverse(w))

    def disk_in_domain(self, xi, r):
        """Whether the closed disk ``D(xi, r)`` lies where the map is univalent."""
        return True

    def check_disk(self, xi, r):
        if not self.disk_in_domain(complex(xi), r):
            raise DomainError(f"D({complex(xi)}, {r}) leaves the domain of {self.spec}")

    __call__ = forward


@dataclass(frozen=True)
class AffineMap(ConformalMap):
    a: complex = 1.0
    b: complex = 0.0
    name = "affine"

    def __post_init__(self):
        if complex(self.a) == 0:
            raise InvalidConfigError("affine map needs a != 0")

    def forward(self, z):
        return self.a * np.asarray(z) + self.b

    def derivative(self, z):
        return np.full(np.shape(z), complex(self.a))[()] if np.ndim(z) else complex(self.a)

    def inverse(self, w):
        return (np.asarray(w) - self.b) / self.a

    @property
    def spec(self):
        return f"affine:a={complex(self.a)},b={complex(self.b)}"


@dataclass(frozen=True)
class MoebiusMap(ConformalMap):
    """Disk automorphism ``u -> (u - c) / (1 - conj(c) u)`` carried to the inscribed disk.

    ``phi(z) = center + scale * M_c((z - center) / scale)``; it maps the disk
    of radius ``scale`` about ``center`` onto itself.
    """

    c: complex = 0.0
    center: complex = 0.5 + 0.5j
    scale: float = 0.5
    name = "moebius"

    def __post_init__(self):
        if not abs(complex(self.c)) < 1:
            raise InvalidConfigError(f"Moebius parameter needs |c| < 1, got {self.c}")

    def forward(self, z):
        u = (np.asarray(z) - self.center) / self.scale
        c = complex(self.c)
        return self.center + self.scale * (u - c) / (1 - c.conjugate() * u)

    def derivative(self, z):
        u = (np.asarray(z) - self.center) / self.scale
        c = complex(self.c)
        return (1 - abs(c) ** 2) / (1 - c.conjugate() * u) ** 2

    def inverse(self, w):
        v = (np.asarray(w) - self.center) / self.scale
        c = complex(self.c)
        return self.center + self.scale * (v + c) / (1 + c.conjugate() * v)

    def disk_in_domain(self, xi, r):
        return abs(xi - self.center) + r < self.scale

    @property
    def spec(self):
        return f"moebius:c={complex(self.c)}"


@dataclass(frozen=True)
class SquarePolyMap(ConformalMap):
    """``z -> a z^2 + b`` on the right half-plane; inverse uses the principal root."""

    a: complex = 1.0
    b: complex = 0.0
    name = "square_poly"

    def __post_init__(self):
        if complex(self.a) == 0:
            raise InvalidConfigError("square_poly needs a != 0")

    def forward(self, z):
        z = np.asarray(z)
        return self.a * z * z + self.b

    def derivative(self, z):
        return 2 * self.a * np.asarray(z)

    def inverse(self, w):
        return np.sqrt((np.asarray(w, dtype=complex) - self.b) / self.a)

    def disk_in_domain(self, xi, r):
        return xi.real - r > 0

    @property
    def spec(self):
        return f"square_poly:a={complex(self.a)},b={complex(self.b)}"


_MAP_TYPES = {"affine": AffineMap, "moebius": MoebiusMap, "square_poly": SquarePolyMap}
_MAP_PARAMS = {"affine": ("a", "b"), "moebius": ("c",), "square_poly": ("a", "b")}


def parse_map(text):
    """Build a map from ``kind[:key=value,...]``, e.g. ``moebius:c=0.3`` or ``affine:a=0.5+0.25j``.

    ``identity`` is shorthand for ``affine:a=1,b=0``.
    """
    text = text.strip()
    if text == "identity":
        return AffineMap(1.0, 0.0)
    kind, _, rest = text.partition(":")
    if kind not in _MAP_TYPES:
        raise InvalidConfigError(f"unknown map kind {kind!r}; expected one of {sorted(_MAP_TYPES)}")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in _MAP_PARAMS[kind]:
            raise InvalidConfigError(f"bad parameter {item!r} for map {kind!r}")
        try:
            params[key] = complex(re.sub(r"\s+", "", value).replace("i", "j"))
        except ValueError:
            raise InvalidConfigError(f"cannot parse {value!r} as a complex number") from None
    return _MAP_TYPES[kind](**params)


def default_battery():
    """The fixed map battery: one affine map and three non-affine maps."""
    return [
        AffineMap(0.5 * np.exp(0.3j), 0.1 + 0.05j),
        MoebiusMap(0.2),
        MoebiusMap(0.3),
        SquarePolyMap(0.25, 0.5j),
    ]


def xi_grid(cmap, size=4):
    """``xi = psi(z)`` for a ``size x size`` grid of ``z`` filling ``[0.2, 0.8]^2``."""
    t = np.linspace(_K_LO, _K_HI, size)
    z = (t[:, None] + 1j * t[None, :]).ravel()
    return np.asarray(cmap.inverse(z), dtype=complex)


@dataclass(frozen=True, eq=False)
class RegionApprox:
    """Polygon with ``resolution`` vertices approximating ``phi(D(xi, r))``."""

    polygon: np.ndarray = dc_field(repr=False)
    resolution: int = 0

    @property
    def area(self):
        """Signed shoelace area (positive for counter-clockwise vertex order)."""
        x, y = self.polygon[:, 0], self.polygon[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def is_simple(self):
        return bool(shapely.is_simple(shapely.LinearRing(self.polygon)))


def _circle(center, radius, resolution):
    theta = 2 * np.pi * np.arange(resolution) / resolution
    return center + radius * np.exp(1j * theta)


def _as_xy(w):
    return np.column_stack([np.real(w), np.imag(w)])


def _check_resolution(resolution):
    resolution = check_positive_int(resolution, "resolution")
    if resolution < MIN_RESOLUTION:
        raise InvalidConfigError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    return resolution


def image_disk(cmap, xi, r, resolution=4096):
    """Polygon through ``phi`` of ``resolution`` equally spaced points on ``dD(xi, r)``."""
    resolution = _check_resolution(resolution)
    r = check_radius(r)
    xi = complex(xi)
    cmap.check_disk(xi, r)
    return RegionApprox(_as_xy(cmap.forward(_circle(xi, r, resolution))), resolution)


def comparison_disk(cmap, xi, r, resolution=4096):
    """Polygon of ``D(phi(xi), |phi'(xi)| r)`` with vertices ``phi(xi) + phi'(xi) r e^{i theta_k}``.

    Using the same angles as :func:`image_disk` makes both polygons identical
    for affine maps.
    """
    resolution = _check_resolution(resolution)
    xi = complex(xi)
    pts = cmap.forward(xi) + complex(cmap.derivative(xi)) * (_circle(0, r, resolution))
    return RegionApprox(_as_xy(pts), resolution)


def symmdiff_area_mc(cmap, xi, r, samples=10**6, seed=0):
    """Monte Carlo area of ``phi(D(xi, r)) xor D(phi(xi), |phi'(xi)| r)``; returns ``(area, stderr)``.

    Membership in the image uses the exact inverse map.
    """
    xi = complex(xi)
    cmap.check_disk(xi, r)
    samples = check_positive_int(samples, "samples")
    center = complex(cmap.forward(xi))
    rho = abs(complex(cmap.derivative(xi))) * r
    ring = cmap.forward(_circle(xi, r, 1024))
    half = max(float(np.max(np.abs(ring - center))) * 1.05, rho) * 1.05
    k = np.arange(samples, dtype=np.uint64)
    seed = check_seed(seed)
    w = center + half * (2 * rng.keyed_uniform(seed, rng.GEOMETRY, 0, k) - 1
                         + 1j * (2 * rng.keyed_uniform(seed, rng.GEOMETRY, 1, k) - 1))
    in_image = np.abs(cmap.inverse(w) - xi) <= r
    in_disk = np.abs(w - center) <= rho
    hits = (in_image ^ in_disk).astype(float)
    box = (2 * half) ** 2
    p = hits.mean()
    return box * p, box * math.sqrt(p * (1 - p) / samples)


def symmdiff_area(cmap, xi, r, resolution=4096, mc_fallback=True):
    """Area of the symmetric difference between the image polygon and the comparison disk.

    Polygon clipping is done by GEOS. Degenerate clipping falls back to the
    Monte Carlo estimate (with a warning) or raises :class:`ClippingError`.
    """
    image = image_disk(cmap, xi, r, resolution)
    disk = comparison_disk(cmap, xi, r, resolution)
    try:
        p1, p2 = Polygon(image.polygon), Polygon(disk.polygon)
        if not (p1.is_valid and p2.is_valid):
            raise ClippingError("image or comparison polygon is not simple")
        return float(p1.symmetric_difference(p2).area)
    except (ClippingError, shapely.errors.GEOSException) as exc:
        if not mc_fallback:
            raise ClippingError(str(exc)) from exc
        warnings.warn(f"polygon clipping failed ({exc}); using Monte Carlo area", RuntimeWarning,
                      stacklevel=2)
        return symmdiff_area_mc(cmap, xi, r)[0]


def _polar_rule(radial_order, angular_order):
    """Nodes ``(rho, theta)`` and weights for the unit disk: Gauss-Legendre in ``rho``, trapezoid in ``theta``."""
    x, wx = np.polynomial.legendre.leggauss(radial_order)
    rho = 0.5 * (x + 1)
    w_rho = 0.5 * wx * rho
    theta = 2 * np.pi * np.arange(angular_order) / angular_order
    nodes = rho[:, None] * np.exp(1j * theta)[None, :]
    weights = np.repeat(w_rho[:, None] * (2 * np.pi / angular_order), angular_order, axis=1)
    return nodes.ravel(), weights.ravel()


def _image_inside_square(cmap, xi, r):
    ring = cmap.forward(_circle(xi, r, 512))
    if (np.min(ring.real) < 0 or np.max(ring.real) > 1
            or np.min(ring.imag) < 0 or np.max(ring.imag) > 1):
        raise DomainError(f"phi(D({xi}, {r})) leaves the unit square")


def quadrature_orders(field, cmap, xi, r):
    """Default polar orders, raised when ``F o phi`` oscillates faster than 64 x 128 resolves.

    The pulled-back modes have local wavenumber up to ``pi sqrt(2) cutoff |phi'|``
    on ``D(xi, r)``; the rule needs about ``k r / 2`` Gauss nodes and ``k r``
    angular nodes plus a fixed margin.
    """
    ring = xi + r * _circle(0, 1, 64)
    dmax = float(np.max(np.abs(cmap.derivative(np.append(ring, xi)))))
    kr = math.pi * math.sqrt(2) * field.cutoff * dmax * r
    return (max(DEFAULT_RADIAL_ORDER, math.ceil(kr / 2) + 32),
            max(DEFAULT_ANGULAR_ORDER, math.ceil(kr) + 64))


def pullback_disk_integral(field, cmap, xi, r, radial_order=None, angular_order=None):
    """``int_{D(xi, r)} F(phi(x)) dx`` by a polar tensor rule.

    Orders left as ``None`` come from :func:`quadrature_orders`.
    """
    r = check_radius(r)
    xi = complex(xi)
    cmap.check_disk(xi, r)
    _image_inside_square(cmap, xi, r)
    auto_radial, auto_angular = quadrature_orders(field, cmap, xi, r)
    radial_order = check_positive_int(auto_radial if radial_order is None else radial_order, "radial_order")
    angular_order = check_positive_int(auto_angular if angular_order is None else angular_order, "angular_order")
    nodes, weights = _polar_rule(radial_order, angular_order)
    w = cmap.forward(xi + r * nodes)
    values = _modal_sum(field.coefficients, _as_xy(w))
    return float(r * r * np.dot(weights, values))


def conformal_error(field, cmap, xi, r, radial_order=None, angular_order=None):
    """``|mu_U(D(xi,r)) - mu_V(D(phi(xi), |phi'(xi)| r)) |phi'(xi)|^{-2}| / (pi r^2 log(1/r))``."""
    xi = complex(xi)
    mu_u = pullback_disk_integral(field, cmap, xi, r, radial_order, angular_order)
    w = complex(cmap.forward(xi))
    dphi = abs(complex(cmap.derivative(xi)))
    mu_v = disk_integral(field, (w.real, w.imag), dphi * r)
    return abs(mu_u - mu_v / dphi**2) / (math.pi * r * r * math.log(1 / r))


@dataclass(frozen=True)
class SweepRow:
    map: str
    xi: complex
    r: float
    error: float
    symmdiff: float
    ratio_r3: float


def conformal_sweep(field, cmap, radii, xis=None, resolution=4096):
    """Error functional and area distortion over a ``xi``-grid and a list of radii."""
    xis = xi_grid(cmap) if xis is None else np.asarray(xis, dtype=complex)
    rows = []
    for r in radii:
        for xi in xis:
            err = conformal_error(field, cmap, xi, r)
            sd = symmdiff_area(cmap, xi, r, resolution)
            rows.append(SweepRow(cmap.spec, complex(xi), float(r), err, sd, sd / r**3))
    return rows


def median_errors(rows):
    """Median normalised error per radius, in the order the radii first appear."""
    radii = list(dict.fromkeys(row.r for row in rows))
    return radii, [float(np.median([row.error for row in rows if row.r == r])) for r in radii]
