"""Order-preserving, memory-bounded fan-out over a process pool."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def batched(items: Iterable[T], size: int) -> Iterator[list[T]]:
    batch: list[T] = []
    for item in items:
        batch.append(item)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def ordered_map(fn: Callable[..., R], batches: Iterable, workers: int, *args) -> Iterator[R]:
    """Yield ``fn(batch, *args)`` for each batch, in input order.

    ``workers == 1`` runs inline. Otherwise at most ``2 * workers`` batches are
    in flight at once, unlike ``Executor.map`` which drains its input eagerly.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        for batch in batches:
            yield fn(batch, *args)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        for batch in batches:
            pending.append(pool.submit(fn, batch, *args))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
