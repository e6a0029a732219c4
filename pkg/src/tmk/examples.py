"""The two explicit constructions.

(a) alpha = 2/3 + beta, beta = sum_{k>=1} 4^(-2^k). Its shifts {2^l alpha}
    start with one of ten 4-bit patterns, so ||2^l alpha|| > 1/16, and
    Pi_L = prod_{l=0}^{L} |2 sin(pi 2^l alpha)| grows like 3^(L/2) up to a
    factor exp(-11 sum delta_l), delta_l = {2^l beta}.
(b) gamma, the Thue-Morse real 0.1001011001101001... Each factor block
    l = 8j..8j+7 of Pi_L is bracketed by U(c)/D(c), where c is the class of
    the 32 digits starting at digit 8j+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .binreal import DEFAULT_GUARD, RationalReal, RuleReal, shift_distances, shift_windows
from .errors import ConfigError
from .lacunary import trace
from .thue_morse import A_BLOCK, B_BLOCK, CLASS_FREQ, CLASS_NAMES, CLASS_WORDS, classify_quadruples

LOG3_LOG4 = math.log(3.0) / math.log(4.0)
TEN_FORMS = ("1010", "0101", "0010", "1101", "1110", "1001", "1100", "0111", "1011", "0110")
FIT_WINDOW = (512, 4096)


# -- (a) ---------------------------------------------------------------------

def build_alpha_4a(K, guard=DEFAULT_GUARD):
    """2/3 + sum_{k<=K} 4^(-2^k) as an exact rational.

    The dropped tail is below 2 * 4^(-2^(K+1)) and first touches digit
    2^(K+2), so digits 1 .. 2^(K+2) - 1 agree with the full series; shifts
    l are usable up to 2^(K+2) - 1 - guard. Reading past the certified
    digits raises PrecisionError. ``guard`` only documents the usable range.
    """
    if K < 2:
        raise ConfigError("K must be >= 2")
    value = Fraction(2, 3) + sum(Fraction(1, 4 ** (2**k)) for k in range(1, K + 1))
    valid = 2 ** (K + 2) - 1
    # small K with a large guard certifies no shifts at all; reads then fail
    return RationalReal(value, valid_digits=valid, label=f"paper-4a truncated at K={K}")


def alpha_4a_for(L, guard=DEFAULT_GUARD):
    """Smallest truncation whose certified digits cover shifts up to L with ``guard`` bits."""
    need = L + guard + 64
    K = max(2, math.ceil(math.log2(need + 1)) - 2)
    return build_alpha_4a(K)


@dataclass(frozen=True)
class TenForms:
    L: int
    prefixes: dict        # 4-bit prefix -> count over l = 0..L
    all_listed: bool
    min_distance: float   # min_l ||2^l alpha||


def ten_forms_check(alpha, L):
    """4-bit prefixes of {2^l alpha}, l = 0..L, against the ten listed forms."""
    u = shift_windows(alpha, L + 1)
    top = (u >> np.uint64(60)).astype(np.int64)
    counts = np.bincount(top, minlength=16)
    prefixes = {format(i, "04b"): int(c) for i, c in enumerate(counts) if c}
    _, d0, _, _, _ = shift_distances(alpha, L + 1)
    return TenForms(L, prefixes, set(prefixes) <= set(TEN_FORMS), float(d0.min()))


def delta_sums(L):
    """Running sums sum_{l<=j} {2^l beta} for j = 0..L."""
    u = shift_windows(RuleReal("paper-4a-beta"), L + 1)
    return np.cumsum(u.astype(np.float64) / 2.0**64)


def pi_L(alpha, L, guard=DEFAULT_GUARD):
    """log Pi_L = log prod_{l=0}^{L} |2 sin(pi 2^l alpha)|."""
    return trace(alpha, L, guard).log_pi


def log_pi_series(alpha, Lmax, guard=DEFAULT_GUARD):
    """log Pi_L for every L = 0..Lmax from one trace."""
    t = trace(alpha, Lmax + 1, guard)
    return t.partial_f1[1:Lmax + 2].copy()


@dataclass(frozen=True)
class ExponentFit:
    Ls: tuple
    log2_pi: tuple
    slope: float
    intercept: float


def fit_exponent(alpha, L_lo=FIT_WINDOW[0], L_hi=FIT_WINDOW[1], points=16, guard=DEFAULT_GUARD):
    """Least-squares slope of log2 Pi_L against L on a geometric grid of L."""
    Ls = np.unique(np.geomspace(L_lo, L_hi, points).round().astype(np.int64))
    series = log_pi_series(alpha, int(Ls[-1]), guard) / math.log(2.0)
    y = series[Ls]
    slope, intercept = np.polyfit(Ls.astype(np.float64), y, 1)
    return ExponentFit(tuple(int(v) for v in Ls), tuple(float(v) for v in y), float(slope), float(intercept))


def fit_4a_exponent(L_lo=FIT_WINDOW[0], L_hi=FIT_WINDOW[1], points=16):
    return fit_exponent(alpha_4a_for(L_hi + 1), L_lo, L_hi, points)


def lower_bound_margin(Lmax=4096):
    """log Pi_L - (L+1) log(3)/2 + 11 sum_{l<=L} delta_l for L = 0..Lmax.

    The construction shows this is positive for every L.
    """
    series = log_pi_series(alpha_4a_for(Lmax + 1), Lmax)
    L = np.arange(Lmax + 1)
    return series - (L + 1) * 0.5 * math.log(3.0) + 11.0 * delta_sums(Lmax)


# -- (b) ---------------------------------------------------------------------

def class_word(i):
    """32-bit integer of class c_(i+1) (i = 0..9)."""
    bits = []
    for ch in CLASS_WORDS[i]:
        bits.extend(A_BLOCK if ch == "A" else B_BLOCK)
    return int("".join(map(str, bits)), 2)


@dataclass(frozen=True)
class BlockBounds:
    """Per class: U, D and the per-position factor bounds for m = 0..7.

    ``choice[i][m]`` is "lo" when D uses the left end 2^m 0.c and U the right
    end 2^m (0.c + 2^-32), "hi" for the reverse. ``straddle[i][m]`` marks an
    interval containing 1/2, where the upper factor bound is 2.
    """

    U: tuple
    D: tuple
    upper: np.ndarray
    lower: np.ndarray
    choice: tuple
    straddle: tuple

    def as_dict(self):
        return {n: {"U": u, "D": d} for n, u, d in zip(CLASS_NAMES, self.U, self.D)}


def _two_sin(t):
    return abs(2.0 * math.sin(math.pi * float(t - math.floor(t))))


def block_bounds(context_bits=32):
    """U(c_i) and D(c_i) from the 32-digit class prefixes.

    For digits 8j+1.. beginning with c, {2^(8j+m) gamma} lies in
    [2^m 0.c, 2^m (0.c + 2^-32)) mod 1. |2 sin(pi t)| is monotone on each
    side of 1/2, so the smaller end gives D's factor and the larger U's.
    """
    if context_bits != 32:
        raise ConfigError("block classes are defined by 32-digit contexts")
    U, D, choice, straddle = [], [], [], []
    upper = np.empty((10, 8))
    lower = np.empty((10, 8))
    for i in range(10):
        w = class_word(i)
        ch, st = [], []
        for m in range(8):
            a = Fraction(w << m, 1 << 32)
            b = Fraction((w + 1) << m, 1 << 32)
            fa = a - math.floor(a)
            fb = b - math.floor(b)
            crosses = math.floor(a) == math.floor(b) and fa < Fraction(1, 2) < fb
            va, vb = _two_sin(a), _two_sin(b)
            # |2 sin(pi t)| is concave on [0, 1]: the minimum is always at an end
            lower[i, m] = min(va, vb)
            upper[i, m] = 2.0 if crosses else max(va, vb)
            ch.append("lo" if fa < Fraction(1, 2) else "hi")
            st.append(bool(crosses))
        choice.append(tuple(ch))
        straddle.append(tuple(st))
        U.append(float(np.prod(upper[i])))
        D.append(float(np.prod(lower[i])))
    return BlockBounds(tuple(U), tuple(D), upper, lower, tuple(choice), tuple(straddle))


def gamma_exponent(bounds=None):
    """(lower, upper) = sum_i F(c_i) log2 D(c_i) / 8 and the same with U."""
    b = bounds or block_bounds()
    lo = sum(f * math.log2(d) for f, d in zip(CLASS_FREQ, b.D)) / 8.0
    hi = sum(f * math.log2(u) for f, u in zip(CLASS_FREQ, b.U)) / 8.0
    return lo, hi


def gamma_direct_exponent(U=4096, guard=DEFAULT_GUARD):
    """log2 Pi_L(gamma) / (L+1) at L = 8U - 1."""
    L = 8 * U - 1
    return pi_L(RuleReal("thue-morse"), L, guard) / math.log(2.0) / (L + 1)


def per_position_check(blocks=1000, bounds=None, rtol=1e-12):
    """Count factors |2 sin(pi 2^(8j+m) gamma)|, j < blocks, outside their class bounds."""
    b = bounds or block_bounds()
    gamma = RuleReal("thue-morse")
    labels = classify_quadruples(gamma, blocks).labels
    vals = np.exp(trace(gamma, 8 * blocks).f1[: 8 * blocks]).reshape(blocks, 8)
    lo = b.lower[labels] * (1 - rtol)
    hi = b.upper[labels] * (1 + rtol)
    return int(np.count_nonzero((vals < lo) | (vals > hi)))
