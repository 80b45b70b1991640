"""Ordered thread-pool map used by the randomized pipelines.

Results are always returned in task order, so the number of workers affects
wall-clock time only, never values.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "PANELBAND_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Worker count from the argument, then ``PANELBAND_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    return max(1, int(threads))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    items = list(items)
    n_workers = min(resolve_threads(threads), max(1, len(items)))
    if n_workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))
