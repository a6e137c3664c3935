"""Portable seeded shuffling.

Every random choice in the harness (seed-corpus sampling, per-epoch training
order, synthetic data) goes through this module so that results do not depend
on the Python or NumPy version.

Algorithm ``splitmix64-fy-v1``:

* state is a single unsigned 64-bit integer, initialised to ``seed mod 2**64``
  (negative seeds wrap two's-complement style);
* ``next_u64``: ``state += 0x9E3779B97F4A7C15``; then
  ``z = state``; ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``; return ``z ^ (z >> 31)``
  (all arithmetic mod 2**64);
* ``below(n)``: unbiased draw from ``[0, n)`` by rejection: discard raw
  values ``r < (2**64 - n) % n`` and return ``r % n``;
* ``shuffle``: Fisher-Yates from the top, for ``i = len-1 .. 1`` swap
  element ``i`` with element ``below(i + 1)``.

Any change to the above must bump ``ALGORITHM``.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

ALGORITHM = "splitmix64-fy-v1"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n

    def random(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: MutableSequence[T]) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def permutation(n: int, seed: int) -> list[int]:
    """Seeded permutation of ``range(n)``."""
    order = list(range(n))
    SplitMix64(seed).shuffle(order)
    return order
