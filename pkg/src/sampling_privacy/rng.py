"""Counter-based random streams.

Every draw is a pure function of ``(key, index)``, so an owner's randomness
can be regenerated anywhere (scalar code, the numpy fallback, the compiled
kernel) without passing generator state around. The mixing function is the
SplitMix64 finalizer; splitting a key ``i`` times yields the key of the
``i``-th child stream.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_UNIT = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive(key: int, index: int) -> int:
    """Key of child stream ``index`` of ``key``."""
    return mix64(key + (index + 1) * GAMMA)


def to_unit(x: int) -> float:
    """Map a 64-bit word to a float in [0, 1) using its top 53 bits."""
    return (x >> 11) * _UNIT


def seed_key(seed: int) -> int:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return mix64(seed)


class CounterStream:
    """Sequential view over a counter-based stream.

    ``random()`` returns draw 0, 1, 2, ... of the stream in order. The same
    draws are what the batch kernels compute for an owner, which is what lets
    the scalar mechanisms act as a reference for the vectorized paths.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def for_owner(cls, trial_key: int, owner: int) -> "CounterStream":
        return cls(derive(trial_key, owner))

    def random(self) -> float:
        u = to_unit(derive(self.key, self.counter))
        self.counter += 1
        return u

    def spawn(self, index: int) -> "CounterStream":
        return CounterStream(derive(self.key, index))
