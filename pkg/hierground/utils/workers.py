"""Worker fan-out for scene generation and batched evaluation."""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from hierground.errors import ConfigurationError

logger = logging.getLogger("hierground.utils.workers")

THREADS_ENV = "HIERGROUND_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if count < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {count}")
    return count


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Map ``fn`` over ``items`` keeping input order; serial when one worker."""
    workers = workers or thread_count()
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    logger.debug("fanning %d items out to %d workers", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
