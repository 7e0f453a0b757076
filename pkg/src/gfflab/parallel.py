"""Process-parallel Monte Carlo driver.

Work is cut into chunks of a fixed number of trials that does not depend on
the worker count, each chunk is a pure function of its trial range, and the
chunk outputs are concatenated in trial order. Results are therefore
bit-identical for any number of workers.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int
from .exceptions import InvalidConfigError

DEFAULT_CHUNK = 1024
WORKERS_ENV = "GFFLAB_WORKERS"


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    trials: int

    @classmethod
    def from_samples(cls, samples):
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        sd = float(samples.std(ddof=1)) if n > 1 else float("inf")
        return cls(float(samples.mean()), sd / math.sqrt(n), n)


def default_workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InvalidConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return check_positive_int(value, WORKERS_ENV)


def chunk_ranges(n_items, chunk=DEFAULT_CHUNK):
    return [(lo, min(n_items, lo + chunk)) for lo in range(0, n_items, chunk)]


def _call(args):
    task, lo, hi, kwargs = args
    return task(lo, hi, **kwargs)


def parallel_mc(task, n_items, kwargs=None, workers=None, chunk=DEFAULT_CHUNK):
    """Evaluate ``task(lo, hi, **kwargs)`` over fixed chunks and concatenate.

    ``task`` must be a module-level function returning an array with one
    leading entry per item. Any worker exception propagates and the
    remaining chunks are cancelled.
    """
    kwargs = {} if kwargs is None else kwargs
    if n_items == 0:
        return np.empty(0)
    n_items = check_positive_int(n_items, "n_items")
    workers = default_workers() if workers is None else check_positive_int(workers, "workers")
    jobs = [(task, lo, hi, kwargs) for lo, hi in chunk_ranges(n_items, chunk)]
    if workers == 1 or len(jobs) == 1:
        parts = [_call(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            futures = [pool.submit(_call, job) for job in jobs]
            try:
                parts = [f.result() for f in futures]
            except BaseException:
                for f in futures:
                    f.cancel()
                raise
    return np.concatenate([np.asarray(p) for p in parts], axis=0)
