"""Portable, counter-based pseudo-random number generator.

Every seeded artifact in this package (synthetic corpus, dataset splits,
weight initialization, epoch shuffling) draws from this generator so that
the byte-level output is reproducible across platforms and releases.

The core is the splitmix64 finalizer (Steele, Lea & Flood / Vigna) used in
counter mode: output ``i`` of a stream with 64-bit key ``k`` is

    mix64((k + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64)

where ``mix64`` is the standard xor-shift/multiply avalanche:

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Derived streams (per scan, per training run) use key
``mix64(parent_key XOR mix64((index + 1) * 0x9E3779B97F4A7C15))``.

Integer and uniform draws are exact bit manipulations and therefore fully
portable. Gaussian draws use Box-Muller on those uniforms; they inherit
the platform libm's last-ulp rounding of log/cos/sin, which is far below
anything visible after 16-bit quantization.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    return z


class PortableRng:
    """Deterministic stream of random values for a 64-bit key.

    The scalar and vector methods read from the same counter sequence:
    interleaving ``u64()`` calls with block draws yields the identical
    stream an all-scalar consumer would see.
    """

    def __init__(self, seed: int):
        self._key = seed & _MASK64
        self._counter = 0

    @property
    def key(self) -> int:
        return self._key

    def spawn(self, index: int) -> "PortableRng":
        """Independent child stream; does not advance this stream."""
        child = PortableRng(0)
        child._key = mix64(self._key ^ mix64(((index + 1) * _GOLDEN) & _MASK64))
        return child

    # -- raw draws ---------------------------------------------------------

    def u64(self) -> int:
        self._counter += 1
        return mix64((self._key + self._counter * _GOLDEN) & _MASK64)

    def u64_block(self, n: int) -> np.ndarray:
        start = self._counter + 1
        self._counter += n
        with np.errstate(over="ignore"):
            counters = np.arange(start, start + n, dtype=np.uint64)
            z = np.uint64(self._key) + counters * np.uint64(_GOLDEN)
        return _mix64_vec(z)

    # -- distributions -----------------------------------------------------

    def random(self, n: int | None = None):
        """Float64 in [0, 1): top 53 bits of a u64 over 2**53."""
        if n is None:
            return (self.u64() >> 11) / 9007199254740992.0
        return (self.u64_block(n) >> np.uint64(11)) / 9007199254740992.0

    def uniform(self, lo: float, hi: float, n: int | None = None):
        return lo + (hi - lo) * self.random(n)

    def normal(self, n: int, sigma: float = 1.0, mu: float = 0.0) -> np.ndarray:
        """Box-Muller pairs; u1 shifted into (0, 1] so log never sees 0."""
        pairs = (n + 1) // 2
        u1 = ((self.u64_block(pairs) >> np.uint64(11)) + np.uint64(1)) / 9007199254740992.0
        u2 = (self.u64_block(pairs) >> np.uint64(11)) / 9007199254740992.0
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return mu + sigma * out[:n]

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) via masked rejection."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        mask = (1 << (n - 1).bit_length()) - 1 if n > 1 else 0
        while True:
            r = self.u64() & mask
            if r < n:
                return r

    def integers(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi)."""
        return lo + self.randbelow(hi - lo)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, high index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        self.shuffle(items)
        return items

    def sample(self, items: list, k: int) -> list:
        """First k of a shuffled copy (order of the copy is the draw)."""
        if k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]
