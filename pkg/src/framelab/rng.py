"""Reproducible random streams.

Every stream is a numpy ``Generator`` over the counter-based Philox-4x64
bit generator. The 128-bit Philox key is derived from ``(seed, stream)``
with the SplitMix64 finaliser::

    k0 = splitmix64(seed)
    k1 = splitmix64(k0 ^ splitmix64(stream + 0x9E3779B97F4A7C15))

and the counter starts at zero. Identical ``(seed, stream)`` pairs therefore
give identical draws on every platform, and distinct streams are
statistically independent, which is what lets Monte-Carlo trials run in any
order or on any number of threads.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def philox_key(seed: int, stream: int) -> tuple[int, int]:
    k0 = splitmix64(seed & MASK64)
    k1 = splitmix64(k0 ^ splitmix64((stream + GOLDEN) & MASK64))
    return k0, k1


class SeededRng:
    """An exclusively owned random stream identified by ``(seed, stream)``.

    Not thread-safe; give each thread of execution its own instance.
    """

    __slots__ = ("seed", "stream", "generator")

    def __init__(self, seed: int = 0, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array(philox_key(self.seed, self.stream), dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream: int) -> "SeededRng":
        """A fresh stream under the same master seed."""
        return SeededRng(self.seed, stream)

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def as_generator(rng: SeededRng | np.random.Generator | None) -> np.random.Generator:
    if rng is None:
        return SeededRng(0, 0).generator
    if isinstance(rng, SeededRng):
        return rng.generator
    return rng
