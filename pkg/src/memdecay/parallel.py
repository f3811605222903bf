"""Bounded thread pool for independent per-offset computations.

Results always come back in input order, so every downstream reduction runs
in ascending offset order no matter how many workers were used.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "MEMDECAY_THREADS"

# below this many items the pool overhead dominates
_MIN_PARALLEL_ITEMS = 16


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < _MIN_PARALLEL_ITEMS:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
