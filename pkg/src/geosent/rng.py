"""SplitMix64: a small, portable, seedable 64-bit generator.

Reference: Steele, Lea & Flood, "Fast splittable pseudorandom number
generators" (OOPSLA 2014); constants as in Vigna's public-domain C code.

State advances by the golden-ratio increment ``0x9E3779B97F4A7C15``; each
output is the state passed through a two-round xor-shift-multiply mixer.
Everything is done modulo 2**64, so results are identical on every platform
and Python version.
"""

from __future__ import annotations

from .errors import ArgumentError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        if bound <= 0:
            raise ArgumentError("bound must be positive")
        # largest multiple of bound that fits in 2**64
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound


def derive_seed(seed: int, stream: int) -> int:
    """Independent child seed for substream ``stream`` of ``seed``."""
    return mix64((seed & MASK64) ^ mix64(stream + GOLDEN_GAMMA))
