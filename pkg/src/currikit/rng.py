"""Counter-based deterministic randomness.

Every draw is a pure function of an explicit key, so any part of a run can
be recomputed in isolation and results never depend on worker count,
iteration order, or restart point. blake2b is used for keying because its
output is stable across platforms and Python versions.
"""

from __future__ import annotations

import hashlib
from typing import Iterator, Sequence, TypeVar

MASK64 = (1 << 64) - 1

T = TypeVar("T")


def hash64(*key: object) -> int:
    """Map an arbitrary key tuple to a uniform 64-bit integer."""
    h = hashlib.blake2b(digest_size=8)
    for part in key:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def stream64(*key: object) -> Iterator[int]:
    """Infinite stream of 64-bit values seeded by the key (splitmix64)."""
    state = hash64(*key)
    while True:
        state, value = _splitmix64(state)
        yield value


def coin(*key: object) -> int:
    """A single fair bit for the key."""
    return hash64(*key) & 1


def shuffled(items: Sequence[T], *key: object) -> list[T]:
    """Fisher-Yates shuffle driven by per-step keyed draws."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = hash64(*key, i) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def indices_with_replacement(n: int, count: int, *key: object) -> list[int]:
    """Draw `count` indices in [0, n) with replacement for the key."""
    if n <= 0:
        raise ValueError("cannot draw indices from an empty range")
    gen = stream64(*key)
    return [next(gen) % n for _ in range(count)]
