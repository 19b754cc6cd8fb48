from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError

THREADS_ENV = "CLRLR_THREADS"

_local = threading.local()


def max_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _in_worker(fn):
    def wrapped(item):
        _local.worker = True
        try:
            return fn(item)
        finally:
            _local.worker = False
    return wrapped


def ordered_map(fn, items, threads=None):
    """``map`` that may use a thread pool but returns results in input order.

    Calls made from inside a pool worker run sequentially, so nested
    parallel sections never oversubscribe.
    """
    items = list(items)
    if threads is None:
        threads = 1 if getattr(_local, "worker", False) else max_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(_in_worker(fn), items))
