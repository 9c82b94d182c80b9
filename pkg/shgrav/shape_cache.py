from dataclasses import dataclass
from typing import Dict, List, Tuple
import logging
import threading

import numpy as np

from .trinomial import HarmonicPair, build_shape_functions, shape_matrix

logger = logging.getLogger("SHCoeff")


@dataclass(frozen=True)
class ShapeFunctionSet:
    """Shape functions for one (nmax, R0), sparse and dense. Shared read-only."""
    nmax: int
    R0: float
    pairs: List[List[HarmonicPair]]
    matrices: Tuple[np.ndarray, ...]  # matrices[n]: (2(n+1), nd) rows [c̄n0..c̄nn, s̄n0..s̄nn]


class ShapeFunctionCache:
    def __init__(self):
        # Map: (nmax, R0) -> ShapeFunctionSet
        self._sets: Dict[Tuple[int, float], ShapeFunctionSet] = {}
        self._hits = 0
        self._misses = 0
        self._lock = threading.RLock()

    def get(self, nmax: int, R0: float = 1.0) -> ShapeFunctionSet:
        """Return the set for (nmax, R0), building it once under the lock."""
        key = (int(nmax), float(R0))
        with self._lock:
            cached = self._sets.get(key)
            if cached is not None:
                self._hits += 1
                return cached

            # A larger cached set for the same R0 already holds every lower degree
            for (n_cached, r_cached), s in self._sets.items():
                if r_cached == key[1] and n_cached > key[0]:
                    self._hits += 1
                    return self._truncate(s, key[0])

            self._misses += 1
            pairs = build_shape_functions(key[0], key[1])
            matrices = tuple(shape_matrix(pairs, n) for n in range(key[0] + 1))
            for mat in matrices:
                mat.setflags(write=False)
            built = ShapeFunctionSet(nmax=key[0], R0=key[1], pairs=pairs, matrices=matrices)
            self._sets[key] = built
            logger.debug(f"Built shape functions nmax={key[0]} R0={key[1]:g}")
            return built

    @staticmethod
    def _truncate(s: ShapeFunctionSet, nmax: int) -> ShapeFunctionSet:
        return ShapeFunctionSet(nmax=nmax, R0=s.R0, pairs=s.pairs[: nmax + 1], matrices=s.matrices[: nmax + 1])

    def clear(self):
        with self._lock:
            self._sets.clear()
            self._hits = 0
            self._misses = 0

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"entries": len(self._sets), "hits": self._hits, "misses": self._misses}


# Process-wide instance
shape_cache = ShapeFunctionCache()
