"""Thick and high point statistics.

Counting-exponent fits for DGFF high points, box counting, alpha-energies of
empirical measures, Monte Carlo probabilities of the multiscale corridor
events used for perfect thick points, and an empirical Hoelder scan of the
circle-average process.
"""

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial.distance import pdist

from . import rng
from ._validation import as_points, check_in_square, check_positive_int, check_seed
from .brownian import Corridor, corridor_constant, corridor_probability, corridor_weights
from .exceptions import InsufficientDataError, InvalidConfigError
from .lattice import HighPointReport, high_point_threshold, high_points, sample_dgff
from .parallel import parallel_mc
from .spectral import _modal_sum, _point, j0

__all__ = [
    "HighPointReport", "high_points", "FitResult", "exponent_fit", "exponent_fit_counts",
    "box_dimension", "EmpiricalMeasure", "alpha_energy", "MultiscaleEventSpec",
    "perfect_event_prob", "f_event_prob", "holder_scan", "high_point_counts", "exponent_fit_rows",
]

MIN_EVENT_TRIALS = 1000
MIN_EVENT_STEPS = 1000


@dataclass(frozen=True)
class FitResult:
    """Least-squares slope of ``log y`` against ``log x``."""

    slope: float
    stderr: float
    intercept: float
    x: np.ndarray = dc_field(repr=False)
    y: np.ndarray = dc_field(repr=False)


def _line_fit(logx, logy, seed_se=None):
    logx = np.asarray(logx, dtype=float)
    logy = np.asarray(logy, dtype=float)
    xc = logx - logx.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (logy - logy.mean()) / sxx)
    intercept = float(logy.mean() - slope * logx.mean())
    resid = logy - intercept - slope * logx
    dof = len(logx) - 2
    var_resid = float(resid @ resid) / dof / sxx if dof > 0 else 0.0
    var_seed = 0.0
    if seed_se is not None:
        weights = xc / sxx
        var_seed = float(np.sum(weights**2 * np.asarray(seed_se) ** 2))
    return slope, math.sqrt(var_resid + var_seed), intercept


def exponent_fit_counts(ns, counts):
    """Fit ``log(mean count) ~ slope * log N``.

    ``counts[k]`` holds the per-seed counts at ``ns[k]``. Scales whose mean
    count is zero are dropped with a warning. The standard error adds the
    seed-level spread of each ``log(mean)`` (delta method) to the residual
    scatter about the line.
    """
    ns = np.asarray(ns, dtype=float)
    means, ses, used = [], [], []
    for n, c in zip(ns, counts):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        mean = float(c.mean())
        if mean <= 0:
            warnings.warn(f"mean count at N={n:g} is zero; scale excluded from the fit",
                          RuntimeWarning, stacklevel=2)
            continue
        sd = float(c.std(ddof=1)) if c.size > 1 else 0.0
        means.append(mean)
        ses.append(sd / math.sqrt(c.size) / mean)
        used.append(n)
    if len(set(used)) < 3:
        raise InsufficientDataError(f"need at least 3 scales with nonzero counts, got {len(set(used))}")
    slope, stderr, intercept = _line_fit(np.log(used), np.log(means), ses)
    return FitResult(slope, stderr, intercept, np.asarray(used), np.asarray(means))


def exponent_fit(reports):
    """Growth exponent of high-point counts from reports grouped by grid size."""
    groups = {}
    for rep in reports:
        groups.setdefault(rep.n, []).append(rep.count)
    ns = sorted(groups)
    return exponent_fit_counts(ns, [groups[n] for n in ns])


def box_dimension(points, scales):
    """Slope of ``log(#occupied boxes)`` against ``log(1/size)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise InsufficientDataError("box counting needs a nonempty point set")
    check_in_square(pts)
    scales = np.asarray(scales, dtype=float)
    if len(np.unique(scales)) < 3:
        raise InsufficientDataError("box counting needs at least 3 distinct scales")
    if np.any(scales <= 0):
        raise InvalidConfigError("box sizes must be positive")
    counts = []
    for s in scales:
        n_boxes = math.ceil(1 / s - 1e-9)
        cells = np.minimum(np.floor(pts / s + 1e-9), n_boxes - 1).astype(np.int64)
        counts.append(len(np.unique(cells[:, 0] * n_boxes + cells[:, 1])))
    counts = np.asarray(counts, dtype=float)
    slope, stderr, intercept = _line_fit(np.log(1 / scales), np.log(counts))
    return FitResult(slope, stderr, intercept, 1 / scales, counts)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted atoms in the closed unit square."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        w = np.array(self.weights, dtype=float).ravel()
        if w.shape[0] != pts.shape[0]:
            raise InvalidConfigError("points and weights must have the same length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidConfigError("weights must be finite and nonnegative")
        check_in_square(pts)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @classmethod
    def from_report(cls, report):
        """Uniform probability measure on the high points of a report."""
        if report.count == 0:
            raise InsufficientDataError("the report has no high points")
        return cls(report.coordinates, np.full(report.count, 1.0 / report.count))


def alpha_energy(measure, alpha):
    """``sum_{i != j} w_i w_j / |z_i - z_j|^alpha`` over ordered distinct pairs.

    The diagonal is omitted, so this is a lower surrogate for the energy of the
    square-smeared measure. Coincident atoms of positive weight give ``inf``.
    """
    alpha = float(alpha)
    if not 0 < alpha < 2:
        raise InvalidConfigError(f"alpha must lie in (0, 2), got {alpha}")
    if len(measure.weights) < 2:
        raise InsufficientDataError("alpha-energy needs at least two atoms")
    d = pdist(measure.points)
    w = measure.weights
    wprod = pdist(w[:, None], lambda u, v: u[0] * v[0])
    live = wprod > 0
    if np.any(live & (d == 0)):
        return math.inf
    return float(2 * np.sum(wprod[live] / d[live] ** alpha))


@dataclass(frozen=True)
class MultiscaleEventSpec:
    """Stage ``m`` of the corridor events: times ``t_m = log m!``, length ``log(m + 1)``."""

    a: float
    m: int

    def __post_init__(self):
        if not self.a >= 0:
            raise InvalidConfigError(f"a must be nonnegative, got {self.a}")
        check_positive_int(self.m, "m")

    @property
    def t_m(self):
        return math.lgamma(self.m + 1)

    @property
    def t_next(self):
        return math.lgamma(self.m + 2)

    @property
    def length(self):
        return math.log(self.m + 1)

    @property
    def drift(self):
        return math.sqrt(2 * self.a)

    def corridor(self):
        """``|B(s) - sqrt(2a) s| <= sqrt(L_m)`` for ``0 < s <= L_m``."""
        return Corridor(horizon=self.length, b0=math.sqrt(self.length), drift=-self.drift)

    def lower_bound(self, constant):
        return constant * math.exp(self.a / 2 * math.sqrt(math.log(self.m))) / self.m**self.a


@dataclass(frozen=True)
class PerfectEventResult:
    a: float
    m: int
    estimate: float
    stderr: float
    bound: float
    constant: float
    constant_stderr: float

    @property
    def inconclusive(self):
        return self.stderr > self.estimate / 2

    @property
    def satisfied(self):
        return self.estimate + 3 * self.stderr >= self.bound


def _check_mc(trials, steps):
    trials = check_positive_int(trials, "trials")
    steps = check_positive_int(steps, "steps_per_unit_time")
    if trials < MIN_EVENT_TRIALS:
        raise InvalidConfigError(f"trials must be >= {MIN_EVENT_TRIALS}, got {trials}")
    if steps < MIN_EVENT_STEPS:
        raise InvalidConfigError(f"steps_per_unit_time must be >= {MIN_EVENT_STEPS}, got {steps}")
    return trials, steps


def perfect_event_prob(spec, trials, steps_per_unit_time, seed, constant=None, workers=None):
    """Monte Carlo ``P(E_m)`` with the lower bound ``C exp((a/2) sqrt(log m)) / m^a``.

    ``C = P(max_{[0,1]} |B| <= 1, B(1) >= 1/2)`` is itself estimated on an
    independent stream unless given as ``(value, stderr)``.
    """
    trials, steps = _check_mc(trials, steps_per_unit_time)
    seed = check_seed(seed)
    est = corridor_probability(spec.corridor(), trials, steps, rng.derive_seed(seed, 0),
                               workers=workers)
    if constant is None:
        c = corridor_constant(trials, steps, rng.derive_seed(seed, 1), workers=workers)
        constant = (c.estimate, c.stderr)
    c_val, c_se = (float(v) for v in constant)
    return PerfectEventResult(spec.a, spec.m, est.estimate, est.stderr,
                              spec.lower_bound(c_val), c_val, c_se)


@dataclass(frozen=True)
class FEventResult:
    horizons: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    floor: float

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.estimates) <= 0))


def _aitken_floor(values):
    if len(values) < 3:
        return float(max(0.0, values[-1]))
    p1, p2, p3 = values[-3:]
    d1, d2 = p2 - p1, p3 - p2
    denom = d2 - d1
    if d2 >= 0 or denom <= 0:
        return float(max(0.0, p3))
    return float(min(p3, max(0.0, p3 - d2 * d2 / denom)))


def f_event_prob(horizons, trials, steps_per_unit_time, seed):
    """Truncated ``P(sup_{0 <= s <= h} |B(s)| <= s + 1)`` for each horizon ``h``.

    All horizons are read off the same paths, so the estimates are
    non-increasing in ``h``. ``floor`` is an Aitken extrapolation of the last
    three estimates, clipped to ``[0, last estimate]``.
    """
    horizons = np.sort(np.atleast_1d(np.asarray(horizons, dtype=float)))
    if np.any(horizons <= 0):
        raise InvalidConfigError("horizons must be positive")
    trials = check_positive_int(trials, "trials", minimum=2)
    corridor = Corridor(horizon=float(horizons[-1]), b0=1.0, slope=1.0)
    _, rec = corridor_weights(corridor, 0, trials, steps_per_unit_time, check_seed(seed),
                              record_times=tuple(horizons))
    est = rec.mean(axis=0)
    se = rec.std(axis=0, ddof=1) / math.sqrt(trials)
    return FEventResult(horizons, est, se, _aitken_floor(est))


@dataclass(frozen=True)
class HolderResult:
    max_ratio: float
    quantiles: dict
    ratios: np.ndarray = dc_field(repr=False)


def _radius_levels(r_min, r_max, per_octave):
    n = max(1, math.ceil(per_octave * math.log2(r_max / r_min)))
    return r_min * 2.0 ** (np.arange(n + 1 + per_octave) / per_octave)


def holder_scan(field, gamma, sample_pairs, r_min, seed, r_max=0.1, zeta=0.6, eps=0.05,
                per_octave=4, quantiles=(0.5, 0.9, 0.99)):
    """Empirical Hoelder quotients of the circle-average process.

    For pairs ``(z, r), (w, s)`` with ``r, s >= r_min`` and ``1/2 <= r/s <= 2``
    computes ``|F(z,r) - F(w,s)| rho^{gamma+eps} / ((log 1/rho)^zeta |(z,r)-(w,s)|^gamma)``
    with ``rho = min(r, s)``. Radii live on a log grid with ``per_octave``
    levels per factor 2 so each level is evaluated in one batch; separations
    ``|z - w|`` are log-uniform between ``rho/100`` and ``10 rho``.
    """
    gamma = float(gamma)
    sample_pairs = check_positive_int(sample_pairs, "sample_pairs")
    seed = check_seed(seed)
    if not 0 < r_min < r_max <= 0.2:
        raise InvalidConfigError(f"need 0 < r_min < r_max <= 0.2, got {r_min}, {r_max}")
    levels = _radius_levels(r_min, r_max, per_octave)
    top = np.searchsorted(levels, r_max * (1 + 1e-12), side="right")
    k = np.arange(sample_pairs, dtype=np.uint64)
    u = [rng.keyed_uniform(seed, rng.HOLDER, c, k) for c in range(6)]
    li = np.minimum((u[0] * top).astype(int), top - 1)
    lj = li + np.floor(u[1] * (2 * per_octave + 1)).astype(int) - per_octave
    lj = np.clip(lj, 0, len(levels) - 1)
    r, s = levels[li], levels[lj]
    rho = np.minimum(r, s)
    z = np.column_stack([r + (1 - 2 * r) * u[2], r + (1 - 2 * r) * u[3]])
    dist = rho * 10.0 ** (-2 + 3 * u[4])
    theta = 2 * np.pi * u[5]
    w = z + dist[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    w = np.clip(w, s[:, None], 1 - s[:, None])
    fz = np.empty(sample_pairs)
    fw = np.empty(sample_pairs)
    coeff = field.coefficients
    for lev in np.unique(np.concatenate([li, lj])):
        rad = levels[lev]
        kernel = (lambda kk, rad=rad: j0(kk * rad))
        mz, mw = li == lev, lj == lev
        if mz.any():
            fz[mz] = _modal_sum(coeff, z[mz], kernel)
        if mw.any():
            fw[mw] = _modal_sum(coeff, w[mw], kernel)
    sep = np.sqrt(np.sum((z - w) ** 2, axis=1) + (r - s) ** 2)
    ratios = np.zeros(sample_pairs)
    live = sep > 0
    ratios[live] = (np.abs(fz - fw)[live] * rho[live] ** (gamma + eps)
                    / (np.log(1 / rho[live]) ** zeta * sep[live] ** gamma))
    qs = {float(q): float(np.quantile(ratios, q)) for q in quantiles}
    return HolderResult(float(ratios.max()), qs, ratios)


def _count_task(lo, hi, n, a_values, seed, threshold_coef):
    out = np.empty((hi - lo, len(a_values)), dtype=np.int64)
    for k in range(lo, hi):
        fld = sample_dgff(n, rng.derive_seed(seed, n, k))
        for col, a in enumerate(a_values):
            out[k - lo, col] = high_points(fld, a, threshold_coef).count
    return out


def high_point_counts(ns, a_values, n_seeds, seed, threshold_coef=1 / math.sqrt(math.pi),
                      workers=None):
    """High-point counts over grids and levels; one row ``(N, a, threshold, count, seed)`` per field.

    Field ``k`` at grid ``N`` uses the child seed ``derive_seed(seed, N, k)``.
    """
    a_values = [float(a) for a in a_values]
    n_seeds = check_positive_int(n_seeds, "seeds")
    rows = []
    for n in ns:
        counts = parallel_mc(_count_task, n_seeds,
                             dict(n=int(n), a_values=a_values, seed=check_seed(seed),
                                  threshold_coef=threshold_coef),
                             workers=workers, chunk=4)
        for k in range(n_seeds):
            child = rng.derive_seed(seed, int(n), k)
            for col, a in enumerate(a_values):
                rows.append((int(n), a, high_point_threshold(int(n), a, threshold_coef),
                             int(counts[k, col]), child))
    return rows


def exponent_fit_rows(rows, a):
    """Exponent fit restricted to level ``a`` from ``(N, a, threshold, count, seed)`` rows."""
    groups = {}
    for n, level, _, count, _ in rows:
        if math.isclose(level, a):
            groups.setdefault(n, []).append(count)
    ns = sorted(groups)
    return exponent_fit_counts(ns, [groups[n] for n in ns])
