"""Memoized rational-integer helpers.

Factorizations are kept in memory and, when the environment variable
KKIT_CACHE_DIR names a directory, persisted there as JSON so repeated CLI
runs skip sympy's factoring.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from pathlib import Path

from sympy import factorint as _sympy_factorint
from sympy import primerange
from sympy.ntheory import sqrt_mod

_disk: dict[int, dict[int, int]] | None = None
_dirty = False


def _cache_file() -> Path | None:
    d = os.environ.get("KKIT_CACHE_DIR")
    if not d:
        return None
    return Path(d) / "factorizations.json"


def _load() -> dict[int, dict[int, int]]:
    global _disk
    if _disk is None:
        _disk = {}
        path = _cache_file()
        if path is not None and path.exists():
            try:
                raw = json.loads(path.read_text())
                _disk = {int(n): {int(p): int(e) for p, e in f.items()} for n, f in raw.items()}
            except (OSError, ValueError):
                _disk = {}
    return _disk


def factorint(n: int) -> dict[int, int]:
    global _dirty
    if n < 1:
        raise ValueError("factorint expects a positive integer")
    disk = _load()
    hit = disk.get(n)
    if hit is not None:
        return hit
    fac = {int(p): int(e) for p, e in _sympy_factorint(n).items()}
    if _cache_file() is not None and n > 10**6:
        disk[n] = fac
        _dirty = True
    else:
        disk[n] = fac
    return fac


def flush() -> None:
    """Write the factorization cache to KKIT_CACHE_DIR (no-op when unset)."""
    global _dirty
    path = _cache_file()
    if path is None or not _dirty or _disk is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({str(n): {str(p): e for p, e in f.items()} for n, f in sorted(_disk.items())}))
    tmp.replace(path)
    _dirty = False


@lru_cache(maxsize=None)
def primes_up_to(n: int) -> tuple[int, ...]:
    return tuple(int(p) for p in primerange(2, n + 1))


def sqrt_mod_all(a: int, p: int) -> list[int]:
    return sorted(int(r) for r in sqrt_mod(a, p, all_roots=True))
