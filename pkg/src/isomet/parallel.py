"""Order-preserving map over a process pool."""
import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers=None):
    """Explicit value, else ``ISOMET_THREADS``, else 1."""
    if workers is None:
        workers = os.environ.get("ISOMET_THREADS", 1)
    workers = int(workers)
    if workers < 1:
        raise ValueError("worker count must be positive")
    return workers


def parallel_map(fn, items, workers=1, chunksize=None):
    """``[fn(x) for x in items]``, spread over ``workers`` processes.

    Results come back in input order, so output never depends on scheduling.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
