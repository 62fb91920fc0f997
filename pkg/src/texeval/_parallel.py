"""Thread-count policy and order-independent reductions.

Work is always cut into fixed-size chunks that do not depend on the thread
count, so results are identical whether chunks run serially or in a pool.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TEXEVAL_THREADS"


def thread_count():
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def chunk_ranges(total, size):
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def map_chunks(func, total, size, threads=None):
    """Apply ``func(lo, hi)`` to fixed chunks of ``range(total)``, in order."""
    ranges = chunk_ranges(total, size)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(ranges) <= 1:
        return [func(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=min(threads, len(ranges))) as pool:
        return list(pool.map(lambda r: func(*r), ranges))


def stable_mean(values):
    """Correctly rounded mean; independent of summation order."""
    values = list(values)
    if not values:
        raise ValueError("mean of empty sequence")
    return math.fsum(values) / len(values)


def stable_mean_stderr(values):
    """Mean and standard error (sample std / sqrt(m)) via exact summation."""
    values = [float(v) for v in values]
    m = len(values)
    mean = stable_mean(values)
    if m < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (m - 1)
    return mean, math.sqrt(var / m)
