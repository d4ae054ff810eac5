"""SplitMix64 generator and seed derivation.

Every random draw in the package goes through SplitMix64 (period 2**64).
The compiled kernels in :mod:`roommates.kernels` reimplement the same
arithmetic, so a given seed produces the same instance on both paths.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer; a bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_stream_seed(master_seed: int, instance_index: int) -> int:
    """Seed for instance ``instance_index`` of a batch keyed by ``master_seed``.

    ``mix64(master + GOLDEN_GAMMA * (index + 1))``. The multiplier is odd, so
    the map is bijective in the index modulo 2**64, and ``mix64`` keeps it so.
    """
    return mix64((master_seed + GOLDEN_GAMMA * (instance_index + 1)) & MASK64)


class SplitMix64:
    """Seedable 64-bit generator with bias-free bounded draws."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)``; draws in the top overflow region are rejected."""
        if m <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % m
