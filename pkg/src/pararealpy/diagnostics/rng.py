"""Portable seeded generator for simulation traces.

xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D) with the
state initialised by one round of splitmix64 of the seed, so seed 0 is
valid. Output is a pure function of the seed on every platform.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        if seed < 0 or seed > MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self._state = splitmix64(seed) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, n: int) -> int:
        """``next_u64() mod n``; the small modulo bias is accepted."""
        return self.next_u64() % n
