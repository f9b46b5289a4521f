"""Deterministic, counter-based random streams.

Every stochastic work item (one mask, one shift, one segment draw) gets its
own generator keyed by (seed, *path), so results are bit-identical no matter
how work is scheduled across threads.
"""

from __future__ import annotations

import numpy as np

# Stream domain tags, so different consumers keyed by the same seed never
# collide on a path prefix.
DOMAIN_RISE_MASK = 0
DOMAIN_SEGMENT_MASK = 1
DOMAIN_BENCHMARK = 2


def stream_rng(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox generator for the work item addressed by ``path``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
