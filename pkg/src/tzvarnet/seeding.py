"""Counter-based sub-seed derivation.

Every randomized stage (fold partitions, CV replications, windows,
simulations) draws its seed through ``derive_seed`` with a context tag, so
results are reproducible and independent of scheduling or thread count.
"""
from __future__ import annotations

import numpy as np

# Context tags keep seed chains from different stages disjoint.
TAG_EQUATION = 101
TAG_FOLD_REPLICATION = 102
TAG_STABILITY_REP = 103
TAG_WINDOW = 104
TAG_COMPARE_TZ = 105
TAG_COMPARE_CLASSIC = 106
TAG_TRUTH = 107
TAG_PANEL = 108


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit sub-seed from non-negative integer parts."""
    entropy = []
    for p in parts:
        p = int(p)
        if p < 0:
            raise ValueError(f"seed parts must be non-negative, got {p}")
        entropy.append(p)
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])
