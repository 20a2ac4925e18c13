import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    """Worker count: ``QCPO_LAB_THREADS`` if set, else the CPU count."""
    env = os.environ.get("QCPO_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"QCPO_LAB_THREADS must be a positive integer, got {env!r}") from None
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Order-preserving map over ``items``, threaded when more than one worker is allowed."""
    items = list(items)
    workers = min(max_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
