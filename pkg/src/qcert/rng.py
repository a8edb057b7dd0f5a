"""Seeded randomness.

Every random draw in the simulator goes through a :class:`RandomSource`.
The backing generator is the stdlib Mersenne Twister seeded from a 64-bit
integer, whose output for ``random()`` and ``getrandbits()`` is fixed across
platforms and CPython releases.
"""

from __future__ import annotations

import math
import random

MASK64 = (1 << 64) - 1


class RandomSource:
    """Deterministic random stream built from a 64-bit seed."""

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._gen = random.Random(seed)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"

    def next_real(self) -> float:
        """Uniform real in [0, 1)."""
        return self._gen.random()

    def next_bit(self) -> int:
        return self._gen.getrandbits(1)

    def next_bits(self, n: int) -> tuple[int, ...]:
        return tuple(self._gen.getrandbits(1) for _ in range(n))

    def next_u64(self) -> int:
        return self._gen.getrandbits(64)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self._gen.randrange(n)

    def next_angle(self) -> float:
        """Uniform angle in [0, 2*pi)."""
        return self._gen.random() * 2.0 * math.pi

    def split(self) -> RandomSource:
        """Child stream seeded from the next 64 bits of this one."""
        return RandomSource(self.next_u64())
