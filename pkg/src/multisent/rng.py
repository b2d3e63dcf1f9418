"""Deterministic pseudo-randomness used for every randomized decision.

All randomized operations (fold assignment, dev splits, shuffles, OOV
vectors, weight init, dropout masks) draw from a single named generator,
SplitMix64, so that a (seed, stream) pair fully determines the outcome
across runs and platforms. Streams are derived from a base seed plus a
sequence of string/int tokens, giving independent substreams without
shared state.

SplitMix64 reference sequence: state advances by the 64-bit golden-ratio
constant; each output is the mix function of the advanced state.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash. Stable across runs, unlike builtin hash()."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_stream(seed: int, *tokens: str | int) -> int:
    """Derive an independent substream seed from a base seed and tokens.

    Tokens identify the purpose of the stream (e.g. "folds", an epoch
    number); the same (seed, tokens) always yields the same substream.
    """
    state = _mix(seed & _MASK64)
    for tok in tokens:
        if isinstance(tok, bool):  # bool is an int; keep the repr explicit
            data = str(tok).encode("utf-8")
        elif isinstance(tok, int):
            data = tok.to_bytes(8, "little", signed=True)
        else:
            data = str(tok).encode("utf-8")
        state = _mix(state ^ fnv1a64(data))
    return state


class SplitMix64:
    """Sequential SplitMix64 generator with vectorized batch draws.

    Scalar and vectorized draws produce the identical stream: drawing n
    values one by one equals one draw of n values.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def u64_array(self, n: int) -> np.ndarray:
        """Draw n raw 64-bit values, advancing the state by n."""
        start = self._state
        idx = np.arange(1, n + 1, dtype=np.uint64)
        states = (np.uint64(start) + idx * np.uint64(_GOLDEN))  # wraps mod 2^64
        z = states
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self._state = (start + n * _GOLDEN) & _MASK64
        return z

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def float_array(self, n: int) -> np.ndarray:
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform_array(self, n: int, low: float, high: float) -> np.ndarray:
        return low + (high - low) * self.float_array(n)

    def next_below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
