"""Reproducible substreams for Monte Carlo work.

Every replication draws from its own generator derived from
``(seed, stream id, replication index)``, so estimates are independent of
evaluation order and bit-for-bit reproducible for a fixed seed.
"""

from __future__ import annotations

import math

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for one replication of one estimator."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def mean_se(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error (ddof=1)."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two replications for a standard error")
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))
