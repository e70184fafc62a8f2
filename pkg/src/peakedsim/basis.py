"""Coordinates on the span of bitstrings with Hamming weight at most W.

Strings are ordered by weight, then by integer value (qubit 0 is the most
significant bit), so that raising W appends new indices without moving old ones.
Within one weight class the rank is the combinatorial number system
``sum_i C(c_i, i)`` over the set-bit significances ``c_1 < c_2 < ...``.
"""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .config import LimitExceeded, max_dimension


class DimensionError(LimitExceeded):
    """Subspace dimension above the configured cap."""


class BasisError(ValueError):
    """String weight or index outside the basis."""


def dimension(n: int, W: int, cap: int | None = None) -> int:
    if not 0 <= W <= n:
        raise BasisError(f"need 0 <= W <= n, got n={n}, W={W}")
    D = sum(comb(n, j) for j in range(W + 1))
    limit = max_dimension() if cap is None else cap
    if D > limit:
        raise DimensionError(f"dimension {D} for n={n}, W={W} exceeds the cap {limit}")
    return D


class BoundedWeightBasis:
    def __init__(self, n: int, W: int, cap: int | None = None):
        if n > 62:
            raise BasisError("at most 62 qubits are supported by the integer encoding")
        self.n = n
        self.W = W
        self.D = dimension(n, W, cap)
        # binom[c, i] = C(c, i) for 0 <= c <= n, 0 <= i <= W + 1
        self.binom = np.array([[comb(c, i) for i in range(W + 2)] for c in range(n + 1)], dtype=np.int64)
        self.offsets = np.zeros(W + 2, dtype=np.int64)
        for w in range(W + 1):
            self.offsets[w + 1] = self.offsets[w] + comb(n, w)
        self._strings: np.ndarray | None = None

    def __len__(self):
        return self.D

    def __repr__(self):
        return f"BoundedWeightBasis(n={self.n}, W={self.W}, D={self.D})"

    def _to_int(self, x) -> int:
        if isinstance(x, str):
            if len(x) != self.n or set(x) - {"0", "1"}:
                raise BasisError(f"expected {self.n}-character bitstring, got {x!r}")
            return int(x, 2) if x else 0
        if isinstance(x, (int, np.integer)):
            if not 0 <= int(x) < (1 << self.n):
                raise BasisError(f"integer {x} out of range for n={self.n}")
            return int(x)
        bits = list(x)
        if len(bits) != self.n:
            raise BasisError(f"expected {self.n} bits, got {len(bits)}")
        out = 0
        for b in bits:
            out = (out << 1) | int(b)
        return out

    def rank(self, x) -> int:
        """Index of ``x`` (bitstring, integer or bit sequence)."""
        v = self._to_int(x)
        w = bin(v).count("1")
        if w > self.W:
            raise BasisError(f"weight {w} exceeds W={self.W}")
        r = int(self.offsets[w])
        i = 0
        pos = 0
        while v:
            if v & 1:
                i += 1
                r += int(self.binom[pos, i])
            v >>= 1
            pos += 1
        return r

    def unrank_int(self, index: int) -> int:
        if not 0 <= index < self.D:
            raise BasisError(f"index {index} out of range [0, {self.D})")
        w = int(np.searchsorted(self.offsets, index, side="right")) - 1
        r = index - int(self.offsets[w])
        v = 0
        c = self.n - 1
        for i in range(w, 0, -1):
            while self.binom[c, i] > r:
                c -= 1
            r -= int(self.binom[c, i])
            v |= 1 << c
            c -= 1
        return v

    def unrank(self, index: int) -> str:
        return format(self.unrank_int(index), f"0{self.n}b") if self.n else ""

    def rank_array(self, ints: np.ndarray) -> np.ndarray:
        """Vectorized rank of an integer array; every entry must have weight <= W."""
        v = np.asarray(ints, dtype=np.int64)
        count = np.zeros(v.shape, dtype=np.int64)
        r = np.zeros(v.shape, dtype=np.int64)
        for pos in range(self.n):
            bit = (v >> pos) & 1
            count += bit
            if np.any(count > self.W):
                raise BasisError(f"weight exceeds W={self.W}")
            r += bit * self.binom[pos, count]
        return r + self.offsets[count]

    def strings(self) -> np.ndarray:
        """All basis strings as integers, in index order (cached)."""
        if self._strings is None:
            out = np.empty(self.D, dtype=np.int64)
            for w in range(self.W + 1):
                lo, hi = int(self.offsets[w]), int(self.offsets[w + 1])
                block = np.fromiter(
                    (sum(1 << c for c in cs) for cs in combinations(range(self.n), w)),
                    dtype=np.int64, count=hi - lo)
                out[lo:hi] = np.sort(block)
            self._strings = out
        return self._strings

    def weights(self) -> np.ndarray:
        w = np.zeros(self.D, dtype=np.int64)
        for k in range(self.W + 1):
            w[self.offsets[k]:self.offsets[k + 1]] = k
        return w
