"""Derivation of independent, reproducible random streams.

Every random draw in the package comes from a generator derived from a
master seed plus a structured key (point index, trial index, purpose tag).
Streams derived this way are independent of execution order, so trials can
be sharded, parallelized or re-run individually without perturbing any
other draw.
"""

from __future__ import annotations

import numpy as np

# Purpose tags appended to the spawn key so the four draws inside one trial
# never share a stream.
SUPPORT = 0
SIGNAL = 1
MATRIX = 2
NOISE = 3


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by (master_seed, *key)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
