"""Thue-Morse bits, evil/odious integers and the 8-block quadruples of gamma.

Indexing follows the usual convention: n_1 = 0, n_2 = 3, ... for the evil
numbers and m_1 = 1, m_2 = 2, ... for the odious ones, so
n_k = 2(k-1) + t_{k-1} and m_k = 2(k-1) + 1 - t_{k-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binreal import tm_parity
from .errors import ConfigError, DataError

A_BLOCK = (1, 0, 0, 1, 0, 1, 1, 0)
B_BLOCK = tuple(1 - b for b in A_BLOCK)

# c1..c10 as A/B words; A is an 8-block with t_v = 0, B one with t_v = 1
CLASS_WORDS = ("AABA", "AABB", "ABAA", "ABBA", "ABAB", "BBAB", "BBAA", "BABB", "BAAB", "BABA")
CLASS_NAMES = tuple(f"c{i}" for i in range(1, 11))
CLASS_FREQ = tuple(1 / 6 if w in ("ABBA", "BAAB") else 1 / 12 for w in CLASS_WORDS)

_LOOKUP = np.full(16, -1, dtype=np.int64)
for _i, _w in enumerate(CLASS_WORDS):
    _LOOKUP[int(_w.replace("A", "0").replace("B", "1"), 2)] = _i


def tm_bit(n):
    """t_n = s_2(n) mod 2."""
    if n < 0:
        raise ConfigError("tm_bit needs n >= 0")
    return int(n).bit_count() & 1


def digit_sum(n):
    return int(n).bit_count()


def evil_at(k):
    """n_k, the k-th evil number (k >= 1)."""
    if k < 1:
        raise ConfigError("index k starts at 1")
    return 2 * (k - 1) + tm_bit(k - 1)


def odious_at(k):
    if k < 1:
        raise ConfigError("index k starts at 1")
    return 2 * (k - 1) + 1 - tm_bit(k - 1)


def evil_stream(count, start=1):
    """n_start .. n_{start+count-1} as int64."""
    if count < 1:
        raise ConfigError("count must be >= 1")
    j = np.arange(start - 1, start - 1 + count, dtype=np.uint64)
    return (2 * j + tm_parity(j)).astype(np.int64)


def odious_stream(count, start=1):
    if count < 1:
        raise ConfigError("count must be >= 1")
    j = np.arange(start - 1, start - 1 + count, dtype=np.uint64)
    return (2 * j + 1 - tm_parity(j)).astype(np.int64)


@dataclass
class EvilCursor:
    """Streaming n_k (or m_k with ``odious=True``).

    Each step moves to the next pair (2m, 2m+1) and updates t_m from t_{m-1}:
    going m-1 -> m flips c+1 bits where c is the number of trailing ones of
    m-1, so the parity changes iff c is even.
    """

    odious: bool = False
    k: int = 1
    _m: int = 0
    _t: int = 0

    @classmethod
    def at(cls, k, odious=False):
        m = k - 1
        return cls(odious=odious, k=k, _m=m, _t=tm_bit(m))

    @property
    def value(self):
        return 2 * self._m + (self._t ^ int(self.odious))

    def step(self):
        m = self._m + 1
        trailing_ones = (m & -m).bit_length() - 1
        if trailing_ones % 2 == 0:
            self._t ^= 1
        self._m = m
        self.k += 1
        return self.value

    def clone(self):
        return EvilCursor(self.odious, self.k, self._m, self._t)

    def take(self, count):
        out = [self.value]
        for _ in range(count - 1):
            out.append(self.step())
        return out

    def __iter__(self):
        c = self.clone()
        yield c.value
        while True:
            yield c.step()


def shift_rule(N_mu, k):
    """n_{N_mu + k} from the shift rule: 2 N_mu + (n_k if s_2(N_mu) even else m_k).

    Valid when N_mu is a multiple of 2^mu and 1 <= k <= 2^mu.
    """
    if k < 1 or N_mu < 0:
        raise ConfigError("shift_rule needs N_mu >= 0 and k >= 1")
    base = 2 * N_mu
    return base + (evil_at(k) if tm_bit(N_mu) == 0 else odious_at(k))


def partner_rule(k):
    """m_k from n_k: 2k-1 if n_k = 2k-2, else 2k-2."""
    return 2 * k - 1 if evil_at(k) == 2 * k - 2 else 2 * k - 2


@dataclass
class BlockProfile:
    counts: tuple
    total: int
    stride: int = 1
    labels: np.ndarray = field(default=None, repr=False)

    @property
    def frequencies(self):
        return tuple(c / self.total for c in self.counts)

    def as_dict(self):
        return {name: c for name, c in zip(CLASS_NAMES, self.counts)}


def block_codes(x, nblocks):
    """0 for an A block, 1 for B, -1 otherwise, for 8-blocks 0..nblocks-1 of x."""
    d = x.digit_window(1, 8 * nblocks).reshape(nblocks, 8)
    is_a = (d == np.array(A_BLOCK, dtype=np.uint8)).all(axis=1)
    is_b = (d == np.array(B_BLOCK, dtype=np.uint8)).all(axis=1)
    return np.where(is_a, 0, np.where(is_b, 1, -1)).astype(np.int64)


def classify_quadruples(x, quadruple_count, stride=1):
    """Classify U groups of four consecutive 8-blocks into c1..c10.

    Group v covers blocks v*stride .. v*stride+3. The default stride 1 gives
    one quadruple per block, i.e. the 32-digit context of every 8-block; with
    stride 4 (aligned, disjoint groups) gamma only ever shows c4 and c9.
    """
    U = int(quadruple_count)
    if U < 1 or stride < 1:
        raise ConfigError("need quadruple_count >= 1 and stride >= 1")
    nblocks = (U - 1) * stride + 4
    codes = block_codes(x, nblocks)
    starts = np.arange(U) * stride
    if (codes < 0).any():
        bad = int(np.flatnonzero(codes < 0)[0])
        raise DataError(f"8-block {bad} (digits {8 * bad + 1}..{8 * bad + 8}) is neither A nor B")
    key = 8 * codes[starts] + 4 * codes[starts + 1] + 2 * codes[starts + 2] + codes[starts + 3]
    labels = _LOOKUP[key]
    if (labels < 0).any():
        bad = int(starts[np.flatnonzero(labels < 0)[0]])
        raise DataError(f"quadruple at block {bad} matches none of the ten classes")
    counts = tuple(int(c) for c in np.bincount(labels, minlength=10))
    return BlockProfile(counts=counts, total=U, stride=stride, labels=labels)
