"""Small shared helpers: worker configuration and chunked parallel maps.

Worker count comes from HYPFILL_THREADS.  Parallel reductions are applied to
per-chunk results in chunk order, so outputs never depend on the worker
count or on completion timing.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("HYPFILL_THREADS", "1")))
    except ValueError:
        return 1


def chunked_map(fn, items, workers: int | None = None, chunks_per_worker: int = 4):
    """Apply fn to chunks of items, returning per-chunk results in order."""
    if workers is None:
        workers = worker_count()
    items = list(items)
    if not items:
        return []
    n_chunks = max(1, min(len(items), workers * chunks_per_worker))
    size = (len(items) + n_chunks - 1) // n_chunks
    chunks = [items[i:i + size] for i in range(0, len(items), size)]
    if workers == 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))
