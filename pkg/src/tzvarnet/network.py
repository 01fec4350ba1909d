"""Signed directed network: adjacency signs and coefficient weights.

Entry (i, j) is the edge FROM source market i TO target market j, i.e.
column j is derived from target j's estimated equation. Self-links (the
own-lag terms) live on the diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .markets import MarketSet


@dataclass(frozen=True)
class SignedNetwork:
    A: np.ndarray  # int8, entries in {-1, 0, +1}
    W: np.ndarray  # float64, support and signs match A
    markets: MarketSet

    def __post_init__(self) -> None:
        A = np.asarray(self.A)
        W = np.asarray(self.W, dtype=np.float64)
        n = self.markets.n
        if A.shape != (n, n) or W.shape != (n, n):
            raise ValueError(f"network matrices must be ({n}, {n})")
        if not np.isin(A, (-1, 0, 1)).all():
            raise ValueError("adjacency entries must lie in {-1, 0, +1}")
        if ((A == 0) != (W == 0.0)).any():
            raise ValueError("weight support does not match adjacency support")
        if (np.sign(W)[A != 0] != A[A != 0]).any():
            raise ValueError("weight signs disagree with adjacency signs")
        A = A.astype(np.int8)
        A.setflags(write=False)
        W = W.copy()
        W.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.markets.n

    def support(self) -> np.ndarray:
        return self.A != 0

    def edge_count(self) -> int:
        return int((self.A != 0).sum())
