"""Optional thread fan-out controlled by the FRACORDER_THREADS variable.

All hot loops in this package are pure functions, so threading is purely a
throughput knob.  Results are always gathered in input order, which keeps
every output byte-identical whether the work ran on one thread or many.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

__all__ = ["ordered_map", "worker_count"]

_ENV_VAR = "FRACORDER_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Worker cap from the environment; 0 (the default) means sequential."""
    raw = os.environ.get(_ENV_VAR, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{_ENV_VAR} must be >= 0, got {n}")
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``fn`` to every item, preserving input order in the result."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
