"""Monte Carlo survival of Brownian paths in symmetric linear corridors.

A path ``Y(t) = B(t) + drift * t`` is simulated on a uniform grid with exact
Gaussian increments keyed on ``(seed, trial, step)``. It survives if
``|Y(t)| <= b0 + slope * t`` on ``[0, horizon]``.

Between grid points the path is a Brownian bridge, and for a linear barrier
the bridge crossing probability has the closed form
``exp(-2 d0 d1 / dt)`` with ``d0, d1`` the endpoint distances to the
barrier. With ``bridge=True`` each trial therefore carries the weight
``prod_k (1 - p_up,k - p_down,k)``, which removes the discrete-monitoring
bias up to the (negligible) chance of touching both walls within one step.
``bridge=False`` gives the plain discretely monitored indicator, whose bias
is one-sided and halves roughly like ``sqrt(dt)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from ._validation import check_positive_int, check_seed
from .exceptions import InvalidConfigError
from .parallel import MCEstimate, parallel_mc

_TRIAL_BLOCK = 4096


@dataclass(frozen=True)
class Corridor:
    """Symmetric corridor ``|Y(t)| <= b0 + slope * t`` for ``Y(t) = B(t) + drift t``."""

    horizon: float
    b0: float
    slope: float = 0.0
    drift: float = 0.0

    def __post_init__(self):
        if not self.horizon > 0 or not math.isfinite(self.horizon):
            raise InvalidConfigError(f"horizon must be positive, got {self.horizon}")
        if not self.b0 > 0:
            raise InvalidConfigError(f"corridor half-width must be positive, got {self.b0}")
        if self.slope < 0:
            raise InvalidConfigError("corridor slope must be nonnegative")


def n_steps(horizon, steps_per_unit_time):
    return max(1, math.ceil(horizon * steps_per_unit_time - 1e-9))


def corridor_weights(corridor, trial_start, trial_stop, steps_per_unit_time, seed,
                     terminal=None, record_times=(), bridge=True):
    """Per-trial survival weights for trials ``trial_start .. trial_stop - 1``.

    ``terminal(y)`` optionally multiplies the final weight by a 0/1 mask of the
    end value. ``record_times`` returns the running weight at intermediate
    times on the same paths (rounded to the grid), as extra columns.
    """
    seed = check_seed(seed)
    steps_per_unit_time = check_positive_int(steps_per_unit_time, "steps_per_unit_time")
    steps = n_steps(corridor.horizon, steps_per_unit_time)
    dt = corridor.horizon / steps
    sd = math.sqrt(dt)
    record_steps = {}
    for col, t in enumerate(record_times):
        k = min(steps, max(1, round(t / dt)))
        record_steps.setdefault(k, []).append(col)
    out_main = np.empty(trial_stop - trial_start)
    out_rec = np.empty((trial_stop - trial_start, len(record_times)))
    for lo in range(trial_start, trial_stop, _TRIAL_BLOCK):
        hi = min(trial_stop, lo + _TRIAL_BLOCK)
        trials = np.arange(lo, hi, dtype=np.uint64)
        y = np.zeros(hi - lo)
        w = np.ones(hi - lo)
        for k in range(1, steps + 1):
            step_normals = rng.keyed_normal(seed, rng.BROWNIAN, trials, np.uint64(k))
            y_new = y + corridor.drift * dt + sd * step_normals
            b_old = corridor.b0 + corridor.slope * (k - 1) * dt
            b_new = corridor.b0 + corridor.slope * k * dt
            inside = np.abs(y_new) <= b_new
            if bridge:
                with np.errstate(under="ignore"):
                    p_up = np.exp(-2 * (b_old - y) * (b_new - y_new) / dt)
                    p_dn = np.exp(-2 * (b_old + y) * (b_new + y_new) / dt)
                w = w * np.where(inside, np.clip(1 - p_up - p_dn, 0.0, 1.0), 0.0)
            else:
                w = w * inside
            y = y_new
            for col in record_steps.get(k, ()):
                out_rec[lo - trial_start:hi - trial_start, col] = w
        if terminal is not None:
            w = w * terminal(y)
        out_main[lo - trial_start:hi - trial_start] = w
    if record_times:
        return out_main, out_rec
    return out_main


def corridor_probability(corridor, trials, steps_per_unit_time, seed, terminal=None,
                         bridge=True, workers=None):
    """Monte Carlo estimate of the survival probability, parallel over trial blocks."""
    trials = check_positive_int(trials, "trials", minimum=2)
    samples = parallel_mc(
        _weights_task, trials,
        dict(corridor=corridor, steps_per_unit_time=steps_per_unit_time, seed=seed,
             terminal=terminal, bridge=bridge),
        workers=workers)
    return MCEstimate.from_samples(samples)


def _weights_task(start, stop, corridor, steps_per_unit_time, seed, terminal, bridge):
    return corridor_weights(corridor, start, stop, steps_per_unit_time, seed,
                            terminal=terminal, bridge=bridge)


def endpoint_at_least(level):
    """Terminal mask ``y >= level`` (a picklable callable)."""
    return _EndpointAtLeast(float(level))


@dataclass(frozen=True)
class _EndpointAtLeast:
    level: float

    def __call__(self, y):
        return (y >= self.level).astype(float)


def corridor_constant(trials, steps_per_unit_time, seed, workers=None):
    """``C = P(max_{[0,1]} |B| <= 1, B(1) >= 1/2)`` by Monte Carlo."""
    return corridor_probability(Corridor(horizon=1.0, b0=1.0), trials, steps_per_unit_time,
                                seed, terminal=endpoint_at_least(0.5), workers=workers)
