"""Reproducible randomness built on the Philox counter-based generator.

Every randomized component takes an explicit 64-bit seed.  Monte-Carlo runs
are grouped into fixed-size chunks; chunk c draws from an independent Philox
stream keyed by (seed, c), so chunks can be simulated in any order or on any
number of threads and still merge to bit-identical results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Budget of uniform draws per chunk; chunk sizes derive from it so that the
# per-chunk coin matrices stay comfortably in memory.
CHUNK_DRAW_BUDGET = 1 << 22


def substream(seed, index):
    """Independent Generator for (seed, index); streams never collide."""
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generator(seed):
    return substream(seed, 0)


def chunk_size(draws_per_run):
    """Runs per chunk for a simulation needing `draws_per_run` uniforms each."""
    return max(1, CHUNK_DRAW_BUDGET // max(64, int(draws_per_run)))


def chunks(runs, draws_per_run):
    """Deterministic (chunk_index, start, size) partition of `runs`."""
    size = chunk_size(draws_per_run)
    out = []
    start = 0
    index = 0
    while start < runs:
        out.append((index, start, min(size, runs - start)))
        start += size
        index += 1
    return out
