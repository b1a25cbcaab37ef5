"""Deterministic, platform-independent random number utilities.

Every stochastic choice in this project (fold shuffles, parameter init,
batch order, dropout masks) flows through SplitMix64 so that a run is a
pure function of its integer seeds, regardless of Python/numpy versions.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def fnv1a64(data: str | bytes) -> int:
    """64-bit FNV-1a hash."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, *parts: object) -> int:
    """Derive an independent stream seed from a root seed and labels.

    Labels are stringified, so (7, "dropout", 0, 3) and (7, "dropout", "0",
    3) collide intentionally only if they print identically.
    """
    h = root & MASK64
    for part in parts:
        h = mix64(h ^ fnv1a64(str(part)))
    return h


class SplitMix64:
    """Sequential SplitMix64 generator."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2^64."""
        return self.next_u64() % n

    def floats(self, n: int) -> np.ndarray:
        """Vectorized batch of n uniforms in [0, 1), float64."""
        idx = np.arange(1, n + 1, dtype=np.uint64)
        z = self.state + idx * np.uint64(_GAMMA)  # wraps mod 2^64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GAMMA) & MASK64
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, low: float, high: float, shape: tuple[int, ...]) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        u = self.floats(n).reshape(shape)
        return low + (high - low) * u

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
