"""Counter-based keyed random numbers.

Each deviate is a pure function of an integer key tuple such as
``(seed, stream, i, j)``: the key is folded through the SplitMix64 finaliser
and the resulting 53-bit uniform is pushed through the normal inverse CDF.
Nothing is stateful, so a coefficient or a Brownian increment does not depend
on which worker produced it, on iteration order, or on how much else was
drawn before it. Truncations of a spectral field at different cutoffs share
their common coefficients.
"""

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)

# stream tags keep unrelated consumers of the same seed apart
SPECTRAL = 1
LATTICE = 2
BROWNIAN = 3
TRIAL_SEED = 4
HOLDER = 5
EXP_NORM = 6
GEOMETRY = 7
MARKOV = 8


def _mix(z):
    z = z ^ (z >> np.uint64(30))
    z = z * _MUL1
    z = z ^ (z >> np.uint64(27))
    z = z * _MUL2
    return z ^ (z >> np.uint64(31))


def _as_u64(x):
    arr = np.asarray(x)
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype.kind not in "iu":
        raise TypeError(f"keys must be integers, got dtype {arr.dtype}")
    return arr.astype(np.uint64)


def keyed_bits(seed, *counters):
    """64-bit hash of ``(seed, *counters)``; all arguments broadcast."""
    with np.errstate(over="ignore"):
        h = _mix(_as_u64(seed) + _GOLDEN)
        for c in counters:
            h = _mix(h ^ (_as_u64(c) * _GOLDEN + _GOLDEN))
    return h


def keyed_uniform(seed, *counters):
    """Uniform deviates on the open interval (0, 1)."""
    h = keyed_bits(seed, *counters)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def keyed_normal(seed, *counters):
    """Standard normal deviates by inverse CDF of :func:`keyed_uniform`."""
    return ndtri(keyed_uniform(seed, *counters))


def derive_seed(seed, *counters):
    """Child seed for trial-level parallelism, e.g. one field per Monte Carlo trial."""
    return int(keyed_bits(seed, TRIAL_SEED, *counters))


def derive_seeds(seed, count):
    return keyed_bits(seed, TRIAL_SEED, np.arange(count, dtype=np.uint64))
