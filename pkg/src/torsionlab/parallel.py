"""Ordered fan-out of independent work items."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(workers=None):
    """``workers`` if given, else ``TORSIONLAB_THREADS``, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("TORSIONLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def parallel_map(fn, items, workers=None):
    """``[fn(x) for x in items]`` computed on up to ``workers`` threads, results in input order."""
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
