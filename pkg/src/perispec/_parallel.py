"""Optional thread-pool mapping controlled by ``PERISPEC_WORKERS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError

ENV_WORKERS = "PERISPEC_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(ENV_WORKERS, "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_WORKERS} must be a positive integer, got {raw!r}") from exc
    if count < 1:
        raise ConfigError(f"{ENV_WORKERS} must be a positive integer, got {raw!r}")
    return count


def parallel_map(fn, items) -> list:
    """``[fn(x) for x in items]``, in order, on up to ``PERISPEC_WORKERS`` threads."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
