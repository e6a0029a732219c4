"""Reals in [0, 1) addressed by their binary digits.

Digit ``i >= 1`` is the coefficient of ``2**-i``. Every evaluation of
``{2^l x}`` or ``{n x}`` in the package goes through a window of these
digits, so the truncation error is always a known power of two.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ConfigError, PrecisionError

DEFAULT_GUARD = 128
SCALE_GUARD = 64
_TWO64 = 2**64
_HALF64 = np.uint64(1 << 63)


def _int_to_bits(value, length):
    if length <= 0:
        return np.zeros(0, dtype=np.uint8)
    raw = value.to_bytes((length + 7) // 8, "big")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[-length:]


def _bits_to_int(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return 0
    pad = (-bits.size) % 8
    if pad:
        bits = np.concatenate([np.zeros(pad, dtype=np.uint8), bits])
    return int.from_bytes(np.packbits(bits).tobytes(), "big")


def tm_parity(n):
    """Thue-Morse bit (binary digit sum mod 2) of a uint64 array."""
    return (np.bitwise_count(np.asarray(n, dtype=np.uint64)) & 1).astype(np.uint8)


class BinaryReal:
    """Base class. Subclasses implement ``_window`` or ``_bits``."""

    kind = "abstract"
    valid_digits: int | None = None

    def _window(self, start, length):
        return _bits_to_int(self._bits(start, length))

    def _bits(self, start, length):
        return _int_to_bits(self._window(start, length), length)

    def _check(self, start, length):
        if start < 1 or length < 1:
            raise ConfigError(f"digit window needs start >= 1 and len >= 1, got ({start}, {length})")
        if self.valid_digits is not None and start + length - 1 > self.valid_digits:
            raise PrecisionError(
                f"{self.describe()}: digits beyond {self.valid_digits} are not certified "
                f"(requested up to {start + length - 1})")

    def window_int(self, start, length):
        """Digits start..start+length-1 packed into an int, first digit most significant."""
        self._check(start, length)
        return self._window(start, length)

    def digit_window(self, start, length):
        """Digits start..start+length-1 as a uint8 array."""
        self._check(start, length)
        return np.ascontiguousarray(self._bits(start, length), dtype=np.uint8)

    def digit(self, i):
        return int(self.digit_window(i, 1)[0])

    def describe(self):
        return self.kind

    def __repr__(self):
        return f"<BinaryReal {self.describe()}>"


class RationalReal(BinaryReal):
    kind = "rational"

    def __init__(self, numerator, denominator=1, valid_digits=None, label=None):
        if denominator == 0:
            raise ConfigError("zero denominator")
        fr = Fraction(numerator, denominator)
        fr -= math.floor(fr)
        self.numerator = fr.numerator
        self.denominator = fr.denominator
        self.valid_digits = valid_digits
        self.label = label

    @property
    def value(self):
        return Fraction(self.numerator, self.denominator)

    def _window(self, start, length):
        q = self.denominator
        r = self.numerator * pow(2, start - 1, q) % q
        return (r << length) // q

    @property
    def exact(self):
        """True when the digit stream is the whole story (no certified-prefix cap)."""
        return self.valid_digits is None

    def mul_exact(self, n, guard):
        r = (int(n) * self.numerator) % self.denominator
        return (r << guard) // self.denominator

    def mul_top64(self, n):
        """Exact top 64 bits of {n p/q} for q < 2^32, vectorized over uint64 n."""
        q = np.uint64(self.denominator)
        r = ((n % q) * np.uint64(self.numerator)) % q
        s = np.uint64(32)
        hi = (r << s) // q
        r2 = (r << s) % q
        return (hi << s) | ((r2 << s) // q)

    def describe(self):
        return self.label or f"{self.numerator}/{self.denominator}"


_RULES = ("thue-morse", "paper-4a", "paper-4a-beta")


class RuleReal(BinaryReal):
    """Digits given by a closed-form rule.

    ``thue-morse``: digit i = 1 - t_{i-1}, i.e. 0.1001011001101001...
    ``paper-4a``: 2/3 + sum_{1<=k<=K} 4^(-2^k); digit i is 1 for odd i and
    for i = 2^(k+1), 1 <= k <= K (no carries occur). ``K=None`` is the full series.
    ``paper-4a-beta``: the same without 2/3, i.e. only the digits at 2^(k+1).
    """

    kind = "rule"

    def __init__(self, rule, K=None):
        if rule not in _RULES:
            raise ConfigError(f"unknown digit rule {rule!r}; known: {', '.join(_RULES)}")
        self.rule = rule
        self.K = K

    def _bits(self, start, length):
        idx = np.arange(start, start + length, dtype=np.uint64)
        if self.rule == "thue-morse":
            return 1 - tm_parity(idx - np.uint64(1))
        if self.rule == "paper-4a":
            bits = (idx & np.uint64(1)).astype(np.uint8)
        else:
            bits = np.zeros(length, dtype=np.uint8)
        top = 62 if self.K is None else min(self.K, 62)
        for k in range(1, top + 1):
            pos = 1 << (k + 1)
            if start <= pos < start + length:
                bits[pos - start] = 1
        if self.K is None and start + length - 1 >= 1 << 63:
            raise PrecisionError(f"{self.rule} rule is tabulated for digit indices below 2^63")
        return bits

    def describe(self):
        return self.rule if self.K is None else f"{self.rule}:{self.K}"


class RandomReal(BinaryReal):
    """Independent fair bits from PCG64 seeded by a SeedSequence.

    Words are drawn in order and cached, so digit i is fixed once generated.
    ``spawn`` gives independent children (numpy's SeedSequence splitting).
    """

    kind = "random"
    _BLOCK = 64

    def __init__(self, seed, spawn_key=()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.PCG64(ss)
        self._words = np.zeros(0, dtype=np.uint64)
        self._lock = threading.Lock()

    def spawn(self, n):
        return [RandomReal(self.seed, self.spawn_key + (i,)) for i in range(n)]

    def _ensure(self, nwords):
        if self._words.size >= nwords:
            return self._words
        with self._lock:
            have = self._words.size
            if have < nwords:
                need = max(nwords - have, self._BLOCK)
                fresh = self._gen.random_raw(need).astype(np.uint64)
                self._words = np.concatenate([self._words, fresh])
            return self._words

    def _bits(self, start, length):
        first = (start - 1) // 64
        last = (start + length - 2) // 64
        words = self._ensure(last + 1)[first:last + 1]
        bits = np.unpackbits(words.astype(">u8").view(np.uint8))
        off = (start - 1) - 64 * first
        return bits[off:off + length]

    def describe(self):
        if self.spawn_key:
            return f"random:{self.seed}/{'.'.join(map(str, self.spawn_key))}"
        return f"random:{self.seed}"


class ScaledReal(BinaryReal):
    """{h x} for an integer h >= 1, computed from ``x`` with SCALE_GUARD extra bits.

    A window ending at digit E is taken from h * (first E + bitlen(h) + guard
    digits of x); its value differs from the true {h x} window by less than
    2^-(E + guard) relative to digit E.
    """

    kind = "scaled"

    def __init__(self, base, h):
        if h < 1:
            raise ConfigError("ScaledReal needs h >= 1")
        self.base = base
        self.h = int(h)
        self.valid_digits = None
        if base.valid_digits is not None:
            self.valid_digits = base.valid_digits - self.h.bit_length() - SCALE_GUARD

    def _window(self, start, length):
        end = start + length - 1
        B = end + self.h.bit_length() + SCALE_GUARD
        v = self.base.window_int(1, B)
        r = (self.h * v) & ((1 << B) - 1)
        return (r >> (B - end)) & ((1 << length) - 1)

    def describe(self):
        return f"{{{self.h}*{self.base.describe()}}}"


def scaled(x, h):
    """The BinaryReal {h x} for h >= 1 (h = 1 returns x itself)."""
    return x if h == 1 else ScaledReal(x, h)


@dataclass(frozen=True)
class FixedFraction:
    """v * 2^-precision with 0 <= v < 2^precision."""

    bits: int
    precision: int
    source: str = ""

    @property
    def value(self):
        return Fraction(self.bits, 1 << self.precision)

    def __float__(self):
        return float(self.value)

    def distance_units(self):
        """Distance to the nearest integer, in units of 2^-precision."""
        return min(self.bits, (1 << self.precision) - self.bits)

    def half_distance_units(self):
        return abs(self.bits - (1 << (self.precision - 1)))

    def top_bits(self, n):
        if n <= self.precision:
            return self.bits >> (self.precision - n)
        return self.bits << (n - self.precision)


def _check_guard(guard):
    # error bounds hold for any positive precision; small P is handy in tests
    if guard < 1:
        raise ConfigError(f"guard must be a positive bit count, got {guard}")


def frac_shift(x, ell, guard=DEFAULT_GUARD):
    """{2^ell x} truncated to ``guard`` bits (digits ell+1 .. ell+guard)."""
    _check_guard(guard)
    if ell < 0:
        raise ConfigError("shift must be non-negative")
    return FixedFraction(x.window_int(ell + 1, guard), guard, f"{x.describe()} << {ell}")


def frac_mul(x, n, guard=DEFAULT_GUARD):
    """{n x} to ``guard`` bits; error below 2^-guard + n 2^-(bitlen(n)+guard).

    Uncapped rationals are reduced exactly, so {q p/q} comes out as 0.
    """
    _check_guard(guard)
    n = int(n)
    if isinstance(x, RationalReal) and x.exact:
        return FixedFraction(x.mul_exact(n, guard), guard, f"{n}*{x.describe()} (exact)")
    B = abs(n).bit_length() + guard
    v = x.window_int(1, B)
    r = (n * v) % (1 << B)
    return FixedFraction(r >> (B - guard), guard, f"{n}*{x.describe()}")


def shift_windows(x, count, start=0):
    """Top 64 bits of {2^l x} for l = start .. start+count-1 as uint64."""
    bits = x.digit_window(start + 1, count + 63)
    return kernels.windows64(bits)


def mul_windows(x, n):
    """Top 64 bits of {n x} for a uint64 array n, from a 128-bit truncation of x.

    The circular error is below n 2^-128 + 2^-64.
    """
    n = np.asarray(n, dtype=np.uint64)
    if isinstance(x, RationalReal) and x.exact and x.denominator < 1 << 32:
        return x.mul_top64(n)
    A = x.window_int(1, 128)
    return kernels.mul_frac_u64(n, A >> 64, A & (_TWO64 - 1))


_REFINE_BELOW = 1 << 11


def shift_distances(x, count, guard=DEFAULT_GUARD, start=0):
    """Distances of {2^l x} to the nearest integer and to 1/2.

    Returns ``(u, d0, dh, singular0, singularh)`` where ``u`` are the 64-bit
    windows and ``d0``/``dh`` are floats. Entries closer than 2^-53 are
    recomputed from a ``guard``-bit window; those within 2^-(guard-2) are
    flagged in the boolean masks and set to 0.
    """
    u = shift_windows(x, count, start)
    m0 = np.minimum(u, np.uint64(0) - u)
    mh = np.where(u >= _HALF64, u - _HALF64, _HALF64 - u)
    d0 = m0.astype(np.float64) / float(_TWO64)
    dh = mh.astype(np.float64) / float(_TWO64)
    s0 = np.zeros(count, dtype=bool)
    sh = np.zeros(count, dtype=bool)
    for arr, mask, d, half in ((m0, s0, d0, False), (mh, sh, dh, True)):
        for i in np.flatnonzero(arr < _REFINE_BELOW):
            ff = frac_shift(x, start + int(i), guard)
            units = ff.half_distance_units() if half else ff.distance_units()
            if units < 4:
                mask[i] = True
                d[i] = 0.0
            else:
                d[i] = float(Fraction(units, 1 << guard))
    return u, d0, dh, s0, sh


def parse_alpha(spec):
    """Build a BinaryReal from a CLI-style spec.

    Accepted: ``p/q``, decimal literals (``0.3``), ``0b0101`` (binary digits
    after the point), ``0x1f`` (hex digits after the point), ``thue-morse``
    (alias ``gamma``), ``paper-4a`` or ``paper-4a:K``, ``paper-4a-beta``,
    ``random:SEED``.
    """
    s = str(spec).strip().lower()
    if s in ("thue-morse", "gamma"):
        return RuleReal("thue-morse")
    if s == "paper-4a-beta":
        return RuleReal("paper-4a-beta")
    if s.startswith("paper-4a"):
        rest = s[len("paper-4a"):]
        if not rest:
            return RuleReal("paper-4a")
        if rest.startswith(":") and rest[1:].isdigit():
            return RuleReal("paper-4a", int(rest[1:]))
        raise ConfigError(f"bad paper-4a spec {spec!r}")
    if s.startswith("random"):
        parts = s.split(":")
        if len(parts) == 2 and parts[1].isdigit():
            return RandomReal(int(parts[1]))
        raise ConfigError(f"random spec needs a seed, e.g. random:42 (got {spec!r})")
    if s.startswith("0b"):
        digits = s[2:]
        if not digits or set(digits) - {"0", "1"}:
            raise ConfigError(f"bad binary digit string {spec!r}")
        return RationalReal(int(digits, 2), 1 << len(digits))
    if s.startswith("0x"):
        digits = s[2:]
        try:
            return RationalReal(int(digits, 16), 1 << (4 * len(digits)))
        except ValueError:
            raise ConfigError(f"bad hex digit string {spec!r}") from None
    try:
        return RationalReal(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"unknown alpha spec {spec!r}") from None
