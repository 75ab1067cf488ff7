import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    v = os.environ.get("SPHERE_PROFILE_THREADS")
    if v:
        try:
            n = int(v)
        except ValueError:
            raise ValueError(f"SPHERE_PROFILE_THREADS must be an integer, got {v!r}") from None
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def ordered_map(fn, items, workers=None):
    """map() over a thread pool; results come back in input order.

    Each item carries its own random stream, so the output does not depend on
    the number of workers or on scheduling.
    """
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
