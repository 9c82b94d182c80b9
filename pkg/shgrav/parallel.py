"""Chunked thread-pool maps with reductions that do not depend on the thread count."""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterator, List, Tuple, TypeVar

import numpy as np

T = TypeVar("T")


def chunk_ranges(total: int, size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def map_chunks(
    fn: Callable[[int, int], T],
    chunks: List[Tuple[int, int]],
    threads: int = 1,
    ordered: bool = True,
) -> Iterator[T]:
    """
    Apply fn(start, stop) to every chunk. Results come back in chunk order when
    `ordered`, otherwise in completion order.
    """
    if threads <= 1 or len(chunks) <= 1:
        for start, stop in chunks:
            yield fn(start, stop)
        return

    with ThreadPoolExecutor(max_workers=threads) as pool:
        if ordered:
            yield from pool.map(lambda c: fn(*c), chunks)
        else:
            futures = [pool.submit(fn, start, stop) for start, stop in chunks]
            for fut in as_completed(futures):
                yield fut.result()


class KahanAccumulator:
    """Compensated running sum of equally shaped arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self._carry = np.zeros(shape)

    def add(self, value: np.ndarray) -> None:
        y = np.asarray(value, dtype=float) - self._carry
        t = self.total + y
        self._carry = (t - self.total) - y
        self.total = t
