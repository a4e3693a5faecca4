"""Deterministic random numbers for reproducible problem instances.

SplitMix64 with a Box-Muller transform on top, implemented directly on
64-bit integer arrays so that generated data is bit-identical across
platforms, numpy versions, and reimplementations in other languages.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _finalize(state: np.ndarray) -> np.ndarray:
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """SplitMix64 stream addressed by position, so blocks vectorize.

    The i-th raw output (1-based) is ``mix(seed + i * golden)``, which matches
    the scalar reference that advances the state by the golden-ratio constant
    before mixing.
    """

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & _MASK)
        self._position = 0

    def uint64(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit outputs."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        idx = np.arange(self._position + 1, self._position + count + 1, dtype=np.uint64)
        self._position += count
        return _finalize(self._seed + idx * _GOLDEN)

    def uniform(self, count: int) -> np.ndarray:
        """Uniform doubles in [0, 1) from the top 53 bits."""
        return (self.uint64(count) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, shape) -> np.ndarray:
        """Standard normal draws via Box-Muller.

        Each call consumes one block of raw outputs: the first half feeds the
        radius (mapped into (0, 1] so the log is finite), the second half the
        angle, and the resulting (cos, sin) pairs are interleaved.
        """
        if isinstance(shape, (int, np.integer)):
            out_shape: tuple[int, ...] = (int(shape),)
        else:
            out_shape = tuple(int(s) for s in shape)
        total = 1
        for s in out_shape:
            total *= s
        if total == 0:
            return np.zeros(out_shape)
        pairs = (total + 1) // 2
        block = self.uint64(2 * pairs) >> np.uint64(11)
        u1 = (block[:pairs].astype(np.float64) + 1.0) * 2.0**-53
        u2 = block[pairs:].astype(np.float64) * 2.0**-53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:total].reshape(out_shape)
