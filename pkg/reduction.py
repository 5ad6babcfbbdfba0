# reduction.py
# Fixed-block map/reduce over the momentum modes. Block boundaries depend only on
# the mode count, and partials are combined with an exactly rounded sum, so the
# result is the same for any thread count.

import math
from typing import Callable, List, Optional

import numpy as np
from joblib import Parallel, delayed

from config import BLOCK_SIZE


class ModeBlocks:
    def __init__(self, n_modes: int, threads: Optional[int] = 1, block_size: int = BLOCK_SIZE):
        self.n_modes = int(n_modes)
        self.block_size = int(block_size)
        self.threads = int(threads) if threads else -1      # None / 0 -> all cores
        self.slices: List[slice] = [slice(a, min(a + self.block_size, self.n_modes))
                                    for a in range(0, self.n_modes, self.block_size)]
        self._pool: Optional[Parallel] = None

    @property
    def parallel(self) -> bool:
        return self.threads != 1 and len(self.slices) > 1

    def __enter__(self):
        if self.parallel:
            self._pool = Parallel(n_jobs=self.threads, backend="threading")
            self._pool.__enter__()
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.__exit__(*exc)
            self._pool = None
        return False

    def map(self, fn: Callable[[slice], complex]) -> List[complex]:
        """fn(block) for every block, results in block order."""
        if not self.parallel:
            return [fn(s) for s in self.slices]
        pool = self._pool or Parallel(n_jobs=self.threads, backend="threading")
        return pool(delayed(fn)(s) for s in self.slices)

    @staticmethod
    def combine(partials: List[complex]) -> complex:
        return complex(math.fsum(p.real for p in partials),
                       math.fsum(p.imag for p in partials))

    def vdot(self, a: np.ndarray, b: np.ndarray) -> complex:
        """sum_k conj(a_k) b_k over flat arrays."""
        return self.combine(self.map(lambda s: complex(np.vdot(a[s], b[s]))))

    def total(self, values: np.ndarray) -> complex:
        return self.combine(self.map(lambda s: complex(np.sum(values[s]))))

    def norm2(self, a: np.ndarray) -> float:
        return math.fsum(self.map(lambda s: float(np.vdot(a[s], a[s]).real)))
