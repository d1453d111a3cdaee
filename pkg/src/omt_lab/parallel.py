"""
Per-path worker pool.

Every path owns its RNG stream, so tasks share no mutable state. Results
come back in index order whatever the thread count, which keeps merged
results and JSON output identical across machines.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, TypeVar

from .settings import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")

CHUNK_SIZE = 256


def map_paths(
    task: Callable[[int], T],
    n: int,
    threads: Optional[int] = None,
    chunk_size: int = CHUNK_SIZE
) -> list[T]:
    """
    Run task(index) for index in range(n) on a thread pool.

    Args:
        task: Per-path function; must only touch state derived from its index
        n: Number of paths
        threads: Worker threads (default: settings, then machine parallelism)
        chunk_size: Paths handed to a worker at a time

    Returns:
        List of task results, ordered by index
    """
    workers = threads or get_settings().worker_threads
    if n <= 0:
        return []
    if workers <= 1 or n <= chunk_size:
        return [task(index) for index in range(n)]

    def run_chunk(first: int) -> list[T]:
        return [task(index) for index in range(first, min(first + chunk_size, n))]

    logger.debug(f"Running {n} paths on {workers} threads in chunks of {chunk_size}")
    results: list[T] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for chunk in pool.map(run_chunk, range(0, n, chunk_size)):
            results.extend(chunk)
    return results
