"""Small shared utilities: worker pools and deterministic reductions."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["resolve_threads", "parallel_map"]


def resolve_threads(flag_value=None) -> int:
    """Worker count: explicit flag, then RADONLAB_THREADS, then the CPU count."""
    if flag_value is not None and int(flag_value) > 0:
        return int(flag_value)
    env = os.environ.get("RADONLAB_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map preserving input order; results are identical for any pool size.

    Work items must be independent (they are: levels, slices and direction
    chunks never share mutable state).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
