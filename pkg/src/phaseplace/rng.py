"""Deterministic random numbers via SplitMix64.

Every stochastic component in the package draws from this generator so that a
run is reproducible bit for bit from its 64-bit seed, on any platform and in
any reimplementation that follows the same constants:

    state   = (state + 0x9E3779B97F4A7C15) mod 2^64      (golden-gamma step)
    z       = state
    z       = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z       = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output  = z ^ (z >> 31)

Doubles come from the top 53 bits: (output >> 11) * 2^-53, uniform on [0, 1).
The state recurrence is a pure increment, so an entire stream can also be
produced in one vectorized shot; `uniform_block` does exactly that and is
stream-identical to the scalar class.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SplitMix64", "uniform_block", "GAMMA", "MIX1", "MIX2"]

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_TO_DOUBLE = 1.0 / (1 << 53)


class SplitMix64:
    """Scalar SplitMix64 stream seeded with a 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * MIX1) & _MASK
        z = ((z ^ (z >> 27)) * MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _TO_DOUBLE

    def randrange(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection-free floor scaling."""
        return int(self.random() * bound)


def uniform_block(seed: int, count: int) -> np.ndarray:
    """The first `count` doubles of the SplitMix64 stream for `seed`.

    Identical to calling SplitMix64(seed).random() `count` times.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    steps = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + np.uint64(GAMMA) * steps
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * _TO_DOUBLE
