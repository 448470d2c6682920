"""Seed derivation for independent, reproducible random streams.

A stream is identified by a 64-bit top-level seed plus a tuple of integer
indices (for the harness: level index, then replication index). The key is

    h = splitmix64(seed)
    for i in indices:
        h = splitmix64(h XOR i)

and the stream is ``numpy.random.Generator(PCG64(h))``. Everything is
computed modulo 2**64, so the mapping is portable across platforms.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *indices: int) -> int:
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    h = splitmix64(seed)
    for i in indices:
        h = splitmix64(h ^ (int(i) & MASK64))
    return h


def substream(seed: int, *indices: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_key(seed, *indices)))
