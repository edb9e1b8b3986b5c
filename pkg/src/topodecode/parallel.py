"""Thread-pool helpers. Work is split into fixed index ranges so results do
not depend on how many workers ran them."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TOPODECODE_THREADS"


def thread_count(requested: int | None = None) -> int:
    """Worker count: ``requested`` if given, else TOPODECODE_THREADS, else the CPU
    count; never above the env cap when it is set."""
    env = os.environ.get(ENV_THREADS)
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            cap = None
    n = requested if requested else (cap or os.cpu_count() or 1)
    if cap is not None:
        n = min(n, cap)
    return max(1, n)


def chunk_ranges(total: int, chunk: int) -> list[tuple[int, int]]:
    return [(lo, min(total, lo + chunk)) for lo in range(0, total, chunk)]


def map_ranges(fn, total: int, chunk: int, threads: int | None = None) -> list:
    """Apply ``fn(lo, hi)`` to consecutive ranges; results come back in order."""
    ranges = chunk_ranges(total, chunk)
    workers = thread_count(threads)
    if workers == 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))
