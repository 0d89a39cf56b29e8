"""Keyed counter-based random streams.

Every stochastic component draws from a Philox generator keyed by an
integer path (seed, index...), so output never depends on iteration or
parallel schedule.
"""

from __future__ import annotations

import zlib

import numpy as np


def keyed_generator(seed: int, *path: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    entropy = (int(seed),) + tuple(int(p) for p in path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, label: str, *path: int) -> int:
    """Stable 64-bit sub-seed for the experiment stage named ``label``."""
    tag = zlib.crc32(label.encode("utf-8"))
    entropy = (int(seed), tag) + tuple(int(p) for p in path)
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)
    return int(state[0] ^ (state[1] >> 1))
