"""Order-preserving map over a process pool.

Results come back in input order, and every reduction downstream uses
math.fsum, so output bytes do not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * threads))
    try:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(func, items, chunksize=chunk))
    except (AttributeError, TypeError, ValueError) as exc:
        # unpicklable callables (closures) fall back to the serial path
        if "pickle" not in str(exc).lower():
            raise
        return [func(x) for x in items]
