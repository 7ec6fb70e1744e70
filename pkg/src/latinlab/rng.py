"""Seeded random stream with a fixed, documented bit-level contract.

Raw 64-bit words come from ``numpy.random.PCG64(seed).random_raw()``,
whose output numpy keeps stable across releases.  A uniform draw below
``m`` (``m < 2**31``) is Lemire's multiply-shift: with ``v`` the top 32
bits of the next word, ``p = v * m``; if ``p mod 2**32`` is below
``(2**32 - m) mod m`` the word is rejected and the next one tried,
otherwise the draw is ``p >> 32``.  Fair coin flips are read from raw
words, least significant bit first.  Anything built on these two
primitives is reproducible bit-for-bit on every platform.
"""

from __future__ import annotations

import numpy as np

RNG_ID = "pcg64-raw/lemire32/v1"

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a sub-stream (worker, box, ...), via SplitMix64 mixing."""
    z = seed & _MASK64
    for p in path:
        z = (z + 0x9E3779B97F4A7C15 * (p + 1)) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
    return z


class RawStream:
    """Bounded integers and coin flips on top of PCG64 raw output."""

    def __init__(self, seed: int, chunk: int = 4096):
        self.seed = int(seed)
        self.bitgen = np.random.PCG64(self.seed & _MASK64)
        self._chunk = chunk
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def words(self, count: int) -> np.ndarray:
        """The next ``count`` raw words, in stream order."""
        have = len(self._buf) - self._pos
        if have >= count:
            out = self._buf[self._pos : self._pos + count]
            self._pos += count
            return out
        out = np.concatenate([self._buf[self._pos :], self.bitgen.random_raw(count - have)])
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0
        return out.astype(np.uint64, copy=False)

    def push_back(self, unused: np.ndarray) -> None:
        """Return unconsumed words so they are read next."""
        if len(unused):
            self._buf = np.concatenate([unused, self._buf[self._pos :]]).astype(np.uint64)
            self._pos = 0

    def word(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self.bitgen.random_raw(self._chunk)
            self._pos = 0
        w = int(self._buf[self._pos])
        self._pos += 1
        return w

    def below(self, m: int) -> int:
        if not 0 < m < 1 << 31:
            raise ValueError("bound must lie in 1..2**31-1")
        threshold = ((1 << 32) - m) % m
        while True:
            p = (self.word() >> 32) * m
            if p & 0xFFFFFFFF >= threshold:
                return p >> 32

    def coins(self, count: int) -> np.ndarray:
        """``count`` fair booleans."""
        nwords = -(-count // 64)
        w = self.words(nwords)
        bits = (w[:, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)
        return bits.reshape(-1)[:count].astype(bool)

    def sample(self, n: int, k: int) -> list[int]:
        """Uniform k-subset of range(n) (partial Fisher-Yates, sorted)."""
        pool = list(range(n))
        for t in range(k):
            u = t + self.below(n - t)
            pool[t], pool[u] = pool[u], pool[t]
        return sorted(pool[:k])

    def permutation(self, n: int) -> list[int]:
        pool = list(range(n))
        for t in range(n - 1):
            u = t + self.below(n - t)
            pool[t], pool[u] = pool[u], pool[t]
        return pool
