"""Counter-based random streams for reproducible parallel walks.

Each walk draws from a Philox stream keyed by (master seed, walk index), so
step t of walk w is a pure function of (seed, w, t): batches are bit-identical
across thread counts and schedules, with no shared generator state.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def stream(master_seed: int, walk_index: int) -> np.random.Generator:
    key = np.array([master_seed & MASK64, walk_index & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_words(master_seed: int, walk_index: int, count: int) -> list[int]:
    """`count` i.i.d. uniform 64-bit integers from the walk's stream."""
    gen = stream(master_seed, walk_index)
    return gen.integers(0, 1 << 64, size=count, dtype=np.uint64).tolist()


def thresholds_from_probs(probs) -> list[int]:
    """Cumulative 64-bit fixed-point thresholds for exact-rational atom weights.

    Sampling picks the first atom whose threshold exceeds the drawn word; a
    weight p occupies floor-rounded mass within 2^-64 of p, and an exact total
    of 1 maps to the full range.
    """
    out = []
    total = 0
    for p in probs:
        total += p
        out.append(int(total * (1 << 64)))
    if out:
        out[-1] = max(out[-1], 1 << 64)
    return out
