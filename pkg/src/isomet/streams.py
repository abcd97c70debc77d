"""Deterministic random streams addressed by integer paths.

Two mechanisms are used:

* :func:`derive_seed` hashes ``(seed, *path)`` through ``numpy.random.SeedSequence``
  into a fresh 64-bit seed. Used for coarse tasks (experiment cells, datasets,
  grid points) where the cost of hashing does not matter.
* :func:`replicate_stream` builds a Philox generator whose key comes from
  ``seed`` and whose counter starts at a block reserved for ``(index, sub)``.
  Creating one is cheap, so every randomization replicate gets its own
  stream and results do not depend on how replicates are scheduled.
"""
from functools import lru_cache

import numpy as np

MASK64 = (1 << 64) - 1


def _normalize(seed):
    return int(seed) & MASK64


def derive_seed(seed, *path):
    """64-bit child seed for the task addressed by ``path``."""
    ss = np.random.SeedSequence(_normalize(seed), spawn_key=tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


def generator(seed, *path):
    """Full-quality generator for ``(seed, *path)``."""
    ss = np.random.SeedSequence(_normalize(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


@lru_cache(maxsize=256)
def _philox_key(seed):
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def replicate_stream(seed, index, sub=0):
    """Counter-based stream for replicate ``index`` of a test seeded with ``seed``.

    Each ``(index, sub)`` pair owns a disjoint 2**128-block slice of the
    Philox counter space under a key derived from ``seed``.
    """
    counter = np.array([0, 0, int(index) & MASK64, int(sub) & MASK64], dtype=np.uint64)
    bitgen = np.random.Philox(key=_philox_key(_normalize(seed)), counter=counter)
    return np.random.Generator(bitgen)
