"""Worker-thread control for the tensor and refinement row loops.

The thread count is process-global and set once by the CLI (``--threads``).
Row chunks write disjoint slices of preallocated output, so results are
bit-identical at any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

_THREADS = 1


def set_threads(n: int) -> None:
    global _THREADS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _THREADS = int(n)


def get_threads() -> int:
    return _THREADS


def run_chunked(work, n_items):
    """Run ``work(lo, hi)`` over a partition of range(n_items).

    Sequential when one thread is configured; otherwise chunks go to a
    thread pool.  ``work`` must only write to per-index slots.
    """
    threads = _THREADS
    if threads == 1 or n_items <= 1:
        work(0, n_items)
        return
    chunk = (n_items + threads - 1) // threads
    bounds = [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for future in [pool.submit(work, lo, hi) for lo, hi in bounds]:
            future.result()
