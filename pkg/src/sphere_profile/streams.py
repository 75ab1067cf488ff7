"""Reproducible random streams.

Every path gets its own Philox generator whose key is derived from
``(seed, purpose, index)``.  Philox is counter-based, so a path's draws depend
only on its key and on how many numbers it has consumed, never on which
worker produced it or in what order.
"""

from __future__ import annotations

import numpy as np

# purpose tags keep the streams of different experiment roles disjoint
Z_PATH = 1
MU = 2
PROFILE = 3
ROUTE_B = 4
KERNEL = 5
GAMMA = 6
PI = 7
REVERSAL = 8
FRESH_MU = 9
NULL = 10


def stream(seed: int, purpose: int = 0, index: int = 0) -> np.random.Generator:
    """Generator for stream ``index`` of role ``purpose`` under master ``seed``."""
    if seed < 0 or purpose < 0 or index < 0:
        raise ValueError("seed, purpose and index must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))
