from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, TypeVar

from ..config import Config
from ..errors import InvalidParameter
from .rng_core import RngStream

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _chunks(n: int, size: int):
    return [(start, min(start + size, n)) for start in range(0, n, size)]


def iter_batch(sampler: Callable[[RngStream], T], n: int, seed: int, offset: int = 0,
               threads: int | None = None, chunk_size: int | None = None) -> Iterator[T]:
    """
    Yield sampler(stream_i) for i = 0..n-1 in index order.

    Sample i always draws from RngStream(seed, offset + i), so the output
    does not depend on the number of worker threads.
    """
    if n < 0:
        raise InvalidParameter(f"sample count must be >= 0, got {n}")
    threads = threads or Config.THREADS
    chunk_size = chunk_size or Config.CHUNK_SIZE
    if chunk_size < 1:
        raise InvalidParameter(f"chunk size must be >= 1, got {chunk_size}")

    def work(bounds) -> List[T]:
        start, stop = bounds
        return [sampler(RngStream.for_sample(seed, i, offset)) for i in range(start, stop)]

    ranges = _chunks(n, chunk_size)
    started = time.perf_counter()
    logger.info(f"batch start: n={n}, seed={seed}, first stream={offset}, threads={threads}")
    if threads == 1 or len(ranges) <= 1:
        for bounds in ranges:
            yield from work(bounds)
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            for block in executor.map(work, ranges):
                yield from block
    logger.info(f"batch done: n={n} in {time.perf_counter() - started:.2f}s")


def run_batch(sampler: Callable[[RngStream], T], n: int, seed: int, offset: int = 0,
              threads: int | None = None, chunk_size: int | None = None) -> List[T]:
    return list(iter_batch(sampler, n, seed, offset, threads, chunk_size))
