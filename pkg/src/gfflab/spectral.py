"""Truncated Gaussian free field on the unit square in the sine eigenbasis.

A field of cutoff ``n`` is

    F(x, y) = sum_{i, j <= n} c_ij sin(pi i x) sin(pi j y),
    c_ij = 2 alpha_ij / (pi sqrt(i^2 + j^2)),

with ``alpha_ij`` i.i.d. standard normal. Averages of a single mode over
circles and disks have Bessel closed forms,

    circle:  sin(pi i x) sin(pi j y) J0(k r)
    disk:    sin(pi i x) sin(pi j y) 2 pi r J1(k r) / k,     k = pi sqrt(i^2 + j^2),

so every linear functional below is exact for the truncated field.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import rng
from ._validation import (
    as_points,
    check_disk_inside,
    check_gamma,
    check_in_square,
    check_positive_int,
    check_radius,
    check_seed,
    check_square_inside,
)
from .bessel import j0, j1
from .exceptions import InvalidConfigError, RadiusTooLargeError

# the g-rule needs log log 1/r > 0
R_RULE_MAX = math.exp(-math.e)
DEFAULT_MIN_CUTOFF = 4096
_ROW_CHUNK = 256


def sinpi(t):
    """``sin(pi t)`` with exact zeros at the integers."""
    t = np.asarray(t, dtype=float)
    red = np.remainder(t, 2.0)
    return np.where((red == 0.0) | (red == 1.0), 0.0, np.sin(np.pi * red))


@dataclass(frozen=True)
class ModeIndex:
    i: int
    j: int

    def __post_init__(self):
        check_positive_int(self.i, "i")
        check_positive_int(self.j, "j")

    @property
    def wavenumber(self):
        return math.pi * math.hypot(self.i, self.j)


@dataclass(frozen=True)
class DiskSpec:
    center: tuple
    radius: float

    @property
    def area(self):
        return math.pi * self.radius**2

    @property
    def size(self):
        return self.radius

    def check_inside(self):
        pts, _ = as_points(self.center)
        check_in_square(pts)
        check_disk_inside(pts, check_radius(self.radius))


@dataclass(frozen=True)
class SquareSpec:
    """Axis-parallel square ``S(z, r)`` centred at ``center`` with side ``side``."""

    center: tuple
    side: float

    @property
    def area(self):
        return self.side**2

    @property
    def size(self):
        return self.side

    def check_inside(self):
        pts, _ = as_points(self.center)
        check_in_square(pts)
        check_square_inside(pts, check_radius(self.side, "side"))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """An immutable sample of the truncated field.

    ``alpha[i-1, j-1]`` is the standard-normal weight of mode ``(i, j)``.
    """

    cutoff: int
    alpha: np.ndarray = dc_field(repr=False)
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.cutoff, "cutoff")
        alpha = np.array(self.alpha, dtype=np.float64, copy=True)
        if alpha.shape != (self.cutoff, self.cutoff):
            raise InvalidConfigError(
                f"alpha must have shape ({self.cutoff}, {self.cutoff}), got {alpha.shape}")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_alpha(cls, alpha, seed=0):
        alpha = np.asarray(alpha, dtype=float)
        return cls(cutoff=alpha.shape[0], alpha=alpha, seed=seed)

    @property
    def coefficients(self):
        """``c_ij = 2 alpha_ij / (pi sqrt(i^2 + j^2))``."""
        return self.alpha * coefficient_scale(self.cutoff)

    def __add__(self, other):
        if not isinstance(other, SpectralField) or other.cutoff != self.cutoff:
            return NotImplemented
        return SpectralField(self.cutoff, self.alpha + other.alpha, seed=self.seed)

    def __mul__(self, scalar):
        return SpectralField(self.cutoff, self.alpha * float(scalar), seed=self.seed)

    __rmul__ = __mul__


def coefficient_scale(n):
    idx = np.arange(1, n + 1, dtype=float)
    return 2.0 / (np.pi * np.sqrt(idx[:, None] ** 2 + idx[None, :] ** 2))


def _wavenumbers(rows, n):
    cols = np.arange(1, n + 1, dtype=float)
    return np.pi * np.sqrt(rows[:, None] ** 2 + cols[None, :] ** 2)


def mode_cutoff_scale(r):
    """``g(r) = 1 / (r log log 1/r)``, the scale separating low and high modes."""
    r = check_radius(r)
    if r >= R_RULE_MAX:
        raise RadiusTooLargeError(
            f"the cutoff rule needs r < exp(-e) = {R_RULE_MAX:.6f}, got r = {r}")
    return 1.0 / (r * math.log(math.log(1.0 / r)))


def default_cutoff(r):
    return max(DEFAULT_MIN_CUTOFF, math.ceil(4 * mode_cutoff_scale(r)))


def snap_radius(r):
    """Snap ``r`` to the grid ``e^{-n}``: returns ``e^{-n}`` with ``e^{-n-1} < r <= e^{-n}``."""
    r = check_radius(r)
    n = math.floor(-math.log(r) + 1e-12)
    return math.exp(-n)


def sample_spectral(cutoff, seed):
    """Draw a field; ``alpha_ij`` is keyed on ``(seed, i, j)`` only."""
    cutoff = check_positive_int(cutoff, "cutoff")
    seed = check_seed(seed)
    idx = np.arange(1, cutoff + 1, dtype=np.uint64)
    alpha = rng.keyed_normal(seed, rng.SPECTRAL, idx[:, None], idx[None, :])
    return SpectralField(cutoff=cutoff, alpha=alpha, seed=seed)


def _modal_sum(coeff, points, radial=None):
    """``sum_ij coeff_ij radial(k_ij) sin(pi i x) sin(pi j y)`` at each point.

    Rows are processed in chunks so that the Bessel factor never has to be
    materialised for the full mode array.
    """
    n = coeff.shape[0]
    idx = np.arange(1, n + 1, dtype=float)
    sy = sinpi(points[:, 1:2] * idx)
    out = np.zeros(points.shape[0])
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        block = coeff[start:start + _ROW_CHUNK]
        if radial is not None:
            block = block * radial(_wavenumbers(rows, n))
        sx = sinpi(points[:, 0:1] * rows)
        out += np.einsum("mj,mj->m", sx @ block, sy)
    return out


def _modal_grid(coeff, xs, ys, radial=None):
    """Same sum on the tensor grid ``xs x ys``; returns shape ``(len(xs), len(ys))``."""
    n = coeff.shape[0]
    idx = np.arange(1, n + 1, dtype=float)
    sy = sinpi(np.asarray(ys, dtype=float)[:, None] * idx)
    out = np.zeros((len(xs), len(ys)))
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        block = coeff[start:start + _ROW_CHUNK]
        if radial is not None:
            block = block * radial(_wavenumbers(rows, n))
        sx = sinpi(np.asarray(xs, dtype=float)[:, None] * rows)
        out += sx @ block @ sy.T
    return out


def _finish(values, scalar):
    return float(values[0]) if scalar else values


def eval_point(field, z):
    """Point value of the truncated field at ``z`` (a point or an ``(m, 2)`` array)."""
    pts, scalar = as_points(z)
    check_in_square(pts)
    return _finish(_modal_sum(field.coefficients, pts), scalar)


def circle_average(field, z, r):
    """Mean of the field over the circle of radius ``r`` about ``z``."""
    pts, scalar = as_points(z)
    r = check_radius(r)
    check_in_square(pts)
    check_disk_inside(pts, r)
    return _finish(_modal_sum(field.coefficients, pts, lambda k: j0(k * r)), scalar)


def _disk_kernel(k, r):
    return 2 * np.pi * r * j1(k * r) / k


def disk_integral(field, z, r):
    """Integral of the field over the disk ``D(z, r)``."""
    pts, scalar = as_points(z)
    r = check_radius(r)
    check_in_square(pts)
    check_disk_inside(pts, r)
    return _finish(_modal_sum(field.coefficients, pts, lambda k: _disk_kernel(k, r)), scalar)


def _square_factors(centers, side, n):
    """Per-axis mode integrals over ``[c - side/2, c + side/2]``, shape ``(m, n)``."""
    idx = np.arange(1, n + 1, dtype=float)
    return 2 * sinpi(centers[:, None] * idx) * sinpi(idx * side / 2) / (np.pi * idx)


def square_integral(field, z, r):
    """Integral of the field over the square of side ``r`` centred at ``z``."""
    pts, scalar = as_points(z)
    r = check_radius(r, "side")
    check_in_square(pts)
    check_square_inside(pts, r)
    qx = _square_factors(pts[:, 0], r, field.cutoff)
    qy = _square_factors(pts[:, 1], r, field.cutoff)
    return _finish(np.einsum("mj,mj->m", qx @ field.coefficients, qy), scalar)


def mode_disk_coefficient(index, z, r):
    """``G_ij(z, r)``: integral of ``sin(pi i u) sin(pi j v)`` over ``D(z, r)``."""
    if not isinstance(index, ModeIndex):
        index = ModeIndex(*index)
    pts, _ = as_points(z)
    r = check_radius(r)
    check_in_square(pts)
    check_disk_inside(pts, r)
    x, y = pts[0]
    k = index.wavenumber
    return float(sinpi(index.i * x) * sinpi(index.j * y) * _disk_kernel(np.array(k), r))


@dataclass(frozen=True)
class VarianceEstimate:
    variance: float
    asymptotic: float
    ratio: float
    cutoff: int


def _resolve_cutoff(r, cutoff):
    if cutoff is None:
        return default_cutoff(r)
    return check_positive_int(cutoff, "cutoff")


def _point(z):
    pts, _ = as_points(z)
    check_in_square(pts)
    return pts


def variance_disk_integral(z, r, cutoff=None):
    """Exact ``E mu(D(z, r))^2`` of the cutoff-``n`` field.

    ``(4 / pi^2) sum_{i,j <= n} G_ij(z, r)^2 / (i^2 + j^2)``, reported with its
    ratio to ``(pi / 2) r^4 log(1/r)``. ``cutoff=None`` applies the default
    rule ``max(4096, ceil(4 g(r)))``.
    """
    pts = _point(z)
    r = check_radius(r)
    check_disk_inside(pts, r)
    n = _resolve_cutoff(r, cutoff)
    x, y = pts[0]
    idx = np.arange(1, n + 1, dtype=float)
    sy = sinpi(idx * y)
    total = 0.0
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        k = _wavenumbers(rows, n)
        g = sinpi(rows * x)[:, None] * sy[None, :] * _disk_kernel(k, r)
        total += np.sum(g * g / (k * k))
    # 1/(i^2 + j^2) = pi^2 / k^2
    variance = float(4.0 * total)
    asymptotic = math.pi / 2 * r**4 * math.log(1 / r)
    return VarianceEstimate(variance, asymptotic, variance / asymptotic, n)


def variance_square_integral(z, r, cutoff=None):
    """Exact ``E mu(S(z, r))^2``; asymptotic target ``r^4 log(1/r) / (2 pi)``."""
    pts = _point(z)
    r = check_radius(r, "side")
    check_square_inside(pts, r)
    n = _resolve_cutoff(r, cutoff)
    qx = _square_factors(pts[:, 0], r, n)[0]
    qy = _square_factors(pts[:, 1], r, n)[0]
    idx = np.arange(1, n + 1, dtype=float)
    total = 0.0
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        q = qx[start:start + _ROW_CHUNK, None] * qy[None, :]
        total += np.sum(q * q / (rows[:, None] ** 2 + idx[None, :] ** 2))
    variance = float(4.0 / math.pi**2 * total)
    asymptotic = r**4 * math.log(1 / r) / (2 * math.pi)
    return VarianceEstimate(variance, asymptotic, variance / asymptotic, n)


def circle_covariance_matrix(z, radii, cutoff=DEFAULT_MIN_CUTOFF):
    """Covariance matrix of ``F(z, r)`` over the given radii for the cutoff field."""
    pts = _point(z)
    radii = [check_radius(r) for r in radii]
    check_disk_inside(pts, max(radii))
    n = check_positive_int(cutoff, "cutoff")
    x, y = pts[0]
    idx = np.arange(1, n + 1, dtype=float)
    sy2 = sinpi(idx * y) ** 2
    cov = np.zeros((len(radii), len(radii)))
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        k = _wavenumbers(rows, n)
        w = 4.0 * (sinpi(rows * x) ** 2)[:, None] * sy2[None, :] / (k * k)
        bess = [j0(k * r) for r in radii]
        for a in range(len(radii)):
            wa = w * bess[a]
            for b in range(a, len(radii)):
                cov[a, b] += np.sum(wa * bess[b])
    return cov + np.triu(cov, 1).T


def circle_covariance(z, r1, r2, cutoff=DEFAULT_MIN_CUTOFF):
    """``E F(z, r1) F(z, r2)`` for the cutoff field."""
    return float(circle_covariance_matrix(z, [r1, r2], cutoff)[0, 1])


def _low_mode_prediction(field, pts, area, n_low):
    n_low = min(n_low, field.cutoff)
    if n_low < 1:
        return 0.0
    coeff = field.coefficients[:n_low, :n_low]
    return area * float(_modal_sum(coeff, pts)[0])


def _check_region(region):
    if not isinstance(region, (DiskSpec, SquareSpec)):
        raise InvalidConfigError(f"region must be a DiskSpec or SquareSpec, got {type(region)!r}")
    region.check_inside()
    return _point(region.center)


def low_mode_count(r):
    """``floor(g(zeta(r)))``: modes kept by the low-mode prediction of the residual."""
    mode_cutoff_scale(r)
    return math.floor(mode_cutoff_scale(snap_radius(r)))


def nu_residual(field, region):
    """Region integral minus its low-mode prediction ``|A| sum c_ij sin sin``."""
    pts = _check_region(region)
    n_low = low_mode_count(region.size)
    if isinstance(region, DiskSpec):
        mu = disk_integral(field, pts[0], region.radius)
    else:
        mu = square_integral(field, pts[0], region.side)
    return mu - _low_mode_prediction(field, pts, region.area, n_low)


def nu_variance(region, cutoff=None):
    """Exact ``E nu(A)^2`` for a cutoff-``n`` field (deterministic companion of :func:`nu_residual`)."""
    pts = _check_region(region)
    r = region.size
    n_low = low_mode_count(r)
    n = _resolve_cutoff(r, cutoff)
    x, y = pts[0]
    idx = np.arange(1, n + 1, dtype=float)
    sy = sinpi(idx * y)
    if isinstance(region, SquareSpec):
        qy = _square_factors(pts[:, 1], r, n)[0]
        qx_all = _square_factors(pts[:, 0], r, n)[0]
    total = 0.0
    for start in range(0, n, _ROW_CHUNK):
        rows = idx[start:start + _ROW_CHUNK]
        k = _wavenumbers(rows, n)
        s = sinpi(rows * x)[:, None] * sy[None, :]
        if isinstance(region, DiskSpec):
            g = s * _disk_kernel(k, r)
        else:
            g = qx_all[start:start + _ROW_CHUNK, None] * qy[None, :]
        low = (rows[:, None] <= n_low) & (idx[None, :] <= n_low)
        d = g - np.where(low, region.area * s, 0.0)
        total += np.sum(d * d / (k * k))
    return float(4.0 * total)


def _riemann_grid(region, r, grid_step):
    """Midpoint grid over the square region with spacing at most ``grid_step``."""
    cx, cy = region.center
    side = region.side
    cells = max(1, math.ceil(side / grid_step - 1e-12))
    h = side / cells
    offsets = (np.arange(cells) + 0.5) * h - side / 2
    return cx + offsets, cy + offsets, h


def _check_liouville(region, r, grid_step):
    if not isinstance(region, SquareSpec):
        raise InvalidConfigError("the Liouville region must be a SquareSpec")
    region.check_inside()
    r = check_radius(r)
    grid_step = r / 4 if grid_step is None else check_radius(grid_step, "grid_step")
    if grid_step > r / 4 * (1 + 1e-12):
        raise InvalidConfigError(f"grid_step must be <= r/4 = {r / 4}, got {grid_step}")
    # every circle D(z, r), z in the region, must stay in the domain
    check_square_inside(_point(region.center), region.side + 2 * r)
    return r, grid_step


def liouville_mass(field, gamma, region, r, grid_step=None):
    """Riemann sum of ``r^{gamma^2/2} exp(sqrt(2 pi) gamma F(z, r))`` over ``region``."""
    gamma = check_gamma(gamma)
    r, grid_step = _check_liouville(region, r, grid_step)
    xs, ys, h = _riemann_grid(region, r, grid_step)
    if gamma == 0.0:
        return float(h * h * len(xs) * len(ys))
    avg = _modal_grid(field.coefficients, xs, ys, lambda k: j0(k * r))
    density = r ** (gamma**2 / 2) * np.exp(math.sqrt(2 * math.pi) * gamma * avg)
    return float(h * h * density.sum())


def liouville_expectation(gamma, region, r, cutoff, grid_step=None):
    """Exact mean of :func:`liouville_mass` over fields of the given cutoff.

    Uses ``E exp(sqrt(2 pi) gamma F) = exp(pi gamma^2 Var F)`` with the
    pointwise circle-average variance of the truncated field.
    """
    gamma = check_gamma(gamma)
    r, grid_step = _check_liouville(region, r, grid_step)
    n = check_positive_int(cutoff, "cutoff")
    xs, ys, h = _riemann_grid(region, r, grid_step)
    idx = np.arange(1, n + 1, dtype=float)
    k = _wavenumbers(idx, n)
    w = 4.0 * j0(k * r) ** 2 / (k * k)
    variance = sinpi(xs[:, None] * idx) ** 2 @ w @ (sinpi(ys[:, None] * idx) ** 2).T
    density = r ** (gamma**2 / 2) * np.exp(math.pi * gamma**2 * variance)
    return float(h * h * density.sum())


def _liouville_task(lo, hi, gamma, xs, ys, h, r, cutoff, seed):
    weights = coefficient_scale(cutoff) * j0(_wavenumbers(np.arange(1, cutoff + 1.0), cutoff) * r)
    out = np.empty(hi - lo)
    for t in range(lo, hi):
        alpha = sample_spectral(cutoff, rng.derive_seed(seed, t)).alpha
        avg = _modal_grid(alpha * weights, xs, ys)
        density = r ** (gamma**2 / 2) * np.exp(math.sqrt(2 * math.pi) * gamma * avg)
        out[t - lo] = h * h * density.sum()
    return out


def liouville_mc(gamma, region, r, cutoff, n_fields, seed, grid_step=None, workers=None):
    """Monte Carlo mean of :func:`liouville_mass` over ``n_fields`` independent fields.

    Field ``t`` uses the child seed ``derive_seed(seed, t)``.
    """
    from .parallel import MCEstimate, parallel_mc

    gamma = check_gamma(gamma)
    r, grid_step = _check_liouville(region, r, grid_step)
    cutoff = check_positive_int(cutoff, "cutoff")
    n_fields = check_positive_int(n_fields, "n_fields", minimum=2)
    xs, ys, h = _riemann_grid(region, r, grid_step)
    samples = parallel_mc(_liouville_task, n_fields,
                          dict(gamma=gamma, xs=xs, ys=ys, h=h, r=r, cutoff=cutoff,
                               seed=check_seed(seed)),
                          workers=workers, chunk=64)
    return MCEstimate.from_samples(samples)
