"""Chunked scans whose results are always combined in generation order."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "GFE_LAB_THREADS"


def thread_count(workers: int | None = None) -> int:
    """Explicit ``workers`` wins, then ``$GFE_LAB_THREADS``, then 1."""
    if workers is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        try:
            workers = int(raw) if raw else 1
        except ValueError:
            workers = 1
    return max(1, workers)


def ordered_chunks(fn, seq, workers: int = 1, min_chunk: int = 2048) -> list:
    """Apply ``fn(chunk, start)`` to consecutive chunks of ``seq``.

    The returned list is in chunk order regardless of completion order,
    so any left-to-right reduction over it is bit-identical to the
    sequential scan.
    """
    n = len(seq)
    if workers <= 1 or n <= min_chunk:
        return [fn(seq, 0)]
    size = max(min_chunk, -(-n // (workers * 4)))
    starts = range(0, n, size)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(seq[s : s + size], s), starts))
