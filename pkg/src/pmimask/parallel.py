"""Chunked worker-pool execution with deterministic reassembly.

Work is split into document chunks; results come back in submission
order, so any reduction over them is independent of worker count.  With
workers <= 1 everything runs in-process, which keeps tracebacks simple.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_CTX = None  # per-process context installed by _init_worker


def _init_worker(ctx) -> None:
    global _CTX
    _CTX = ctx


def get_context():
    return _CTX


def chunked(items: Iterable[T], size: int) -> Iterator[list[T]]:
    it = iter(items)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield block


def map_chunks(
    fn: Callable[[list[T]], R],
    chunks: Iterable[list[T]],
    workers: int,
    ctx=None,
) -> Iterator[R]:
    """Apply fn to each chunk, yielding results in chunk order.

    ``ctx`` is made available to workers via get_context(); it is pickled
    once per worker process, not per chunk.
    """
    if workers <= 1:
        _init_worker(ctx)
        for block in chunks:
            yield fn(block)
        return
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as pool:
        pending = []
        chunk_iter = iter(chunks)
        # keep a bounded window of in-flight chunks so corpora stream
        for block in itertools.islice(chunk_iter, workers * 2):
            pending.append(pool.submit(fn, block))
        while pending:
            fut = pending.pop(0)
            nxt = next(chunk_iter, None)
            if nxt is not None:
                pending.append(pool.submit(fn, nxt))
            yield fut.result()
