import threading
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import gamma_digits, rational_digits
from tmk.binreal import (FixedFraction, RandomReal, RationalReal, RuleReal, frac_mul, frac_shift,
                         mul_windows, parse_alpha, scaled, shift_windows)
from tmk.errors import ConfigError, PrecisionError

fractions_01 = st.builds(lambda q, p: Fraction(p % q, q),
                         st.integers(2, 10**12), st.integers(0, 10**15))


def bits(s):
    return [int(c) for c in s]


def test_digit_window_examples():
    assert RationalReal(1, 3).digit_window(1, 4).tolist() == bits("0101")
    assert RationalReal(1, 4).digit_window(1, 3).tolist() == bits("010")
    assert RuleReal("thue-morse").digit_window(1, 8).tolist() == bits("10010110")


def test_gamma_prefix_matches_known_expansion():
    assert RuleReal("thue-morse").digit_window(1, 16).tolist() == bits("1001011001101001")
    assert RuleReal("thue-morse").digit_window(1, 4096).tolist() == gamma_digits(4096)


def test_dyadic_rational_uses_terminating_expansion():
    x = RationalReal(3, 8)
    assert x.digit_window(1, 10).tolist() == bits("0110000000")


def test_frac_shift_examples():
    third = RationalReal(1, 3)
    assert frac_shift(third, 1, 4).bits == 0b1010
    assert frac_shift(third, 2, 4).bits == 0b0101
    assert frac_shift(RuleReal("thue-morse"), 0, 8).bits == 0b10010110


def test_frac_mul_examples():
    assert frac_mul(RationalReal(1, 4), 3, 8).bits == 0b11000000
    assert frac_mul(RationalReal(1, 3), 3, 8).value < Fraction(1, 2**7)
    v = frac_mul(RationalReal(1, 3), 5, 16).value
    assert abs(v - Fraction(2, 3)) < Fraction(1, 2**15)


@given(fractions_01, st.integers(1, 400), st.integers(1, 200))
def test_digit_window_matches_long_division(fr, start, length):
    assert RationalReal(fr).digit_window(start, length).tolist() == rational_digits(fr, start, length)


@given(fractions_01, st.integers(0, 64), st.integers(32, 160))
def test_frac_shift_agrees_with_frac_mul(fr, ell, P):
    x = RationalReal(fr)
    a = frac_shift(x, ell, P).value
    b = frac_mul(x, 2**ell, P).value
    d = abs(a - b)
    assert min(d, 1 - d) <= Fraction(2, 2**P)


@given(st.integers(0, 2**32), st.integers(0, 64), st.integers(32, 160))
def test_frac_shift_agrees_with_frac_mul_random(seed, ell, P):
    x = RandomReal(seed)
    a = frac_shift(x, ell, P).value
    b = frac_mul(x, 2**ell, P).value
    d = abs(a - b)
    assert min(d, 1 - d) <= Fraction(2, 2**P)


@given(st.integers(2, 10**9), st.integers(1, 10**9), st.integers(32, 128))
def test_frac_mul_by_denominator_vanishes(q, p, P):
    x = RationalReal(p, q)
    ff = frac_mul(x, x.denominator, P)
    assert ff.distance_units() < 4


@given(st.integers(0, 2**40), fractions_01, st.integers(8, 128))
def test_frac_mul_matches_fraction_oracle(n, fr, P):
    v = frac_mul(RationalReal(fr), n, P).value
    exact = (n * fr) % 1
    assert 0 <= exact - v < Fraction(1, 2**P)


def _mult_order_2(q):
    while q % 2 == 0:
        q //= 2
    if q == 1:
        return 1
    k, r = 1, 2 % q
    while r != 1:
        r = r * 2 % q
        k += 1
    return k


def test_rational_digit_streams_are_eventually_periodic():
    for q in range(2, 1001):
        x = RationalReal(1, q)
        per = _mult_order_2(q)
        pre = (q & -q).bit_length()  # the power of two in q delays the period
        d = x.digit_window(1, pre + 3 * per + 8)
        tail = d[pre:]
        assert np.array_equal(tail[per:], tail[:-per]), q


def test_random_real_is_reproducible_and_cached():
    a, b = RandomReal(42), RandomReal(42)
    late = a.digit_window(5000, 100).copy()
    early = a.digit_window(1, 64).copy()
    assert np.array_equal(b.digit_window(1, 64), early)
    assert np.array_equal(b.digit_window(5000, 100), late)
    assert np.array_equal(a.digit_window(5000, 100), late)
    assert not np.array_equal(RandomReal(43).digit_window(1, 64), early)


def test_random_real_spawn_children_are_distinct_and_stable():
    kids = RandomReal(7).spawn(3)
    w = [k.window_int(1, 128) for k in kids]
    assert len(set(w)) == 3
    assert RandomReal(7, (1,)).window_int(1, 128) == w[1]


def test_random_real_concurrent_reads_see_one_stream():
    x = RandomReal(99)
    ref = RandomReal(99).digit_window(1, 20000).copy()
    errors = []

    def reader(off):
        for s in range(1 + off, 20000 - 300, 977):
            if not np.array_equal(x.digit_window(s, 300), ref[s - 1:s + 299]):
                errors.append(s)

    threads = [threading.Thread(target=reader, args=(i * 13,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


@given(fractions_01, st.integers(0, 300), st.integers(1, 40))
def test_shift_windows_match_oracle(fr, start, count):
    u = shift_windows(RationalReal(fr), count, start)
    for i, w in enumerate(u):
        ds = rational_digits(fr, start + i + 1, 64)
        assert int(w) == int("".join(map(str, ds)), 2)


@given(st.lists(st.integers(0, 2**40), min_size=1, max_size=20), fractions_01)
def test_mul_windows_rational_exact(ns, fr):
    u = mul_windows(RationalReal(fr), np.array(ns, dtype=np.uint64))
    for n, w in zip(ns, u):
        want = ((n * fr) % 1 * 2**64).__floor__()
        if fr.denominator < 2**32:
            assert int(w) == want
        else:  # 128-bit truncation: circular error below n 2^-128 + 2^-64
            diff = (int(w) - want) % 2**64
            assert min(diff, 2**64 - diff) <= 2


@given(st.lists(st.integers(0, 2**40), min_size=1, max_size=20), st.integers(0, 2**32))
def test_mul_windows_random_within_bound(ns, seed):
    x = RandomReal(seed)
    v = Fraction(x.window_int(1, 400), 2**400)
    u = mul_windows(x, np.array(ns, dtype=np.uint64))
    for n, w in zip(ns, u):
        exact = (n * v) % 1
        d = abs(exact - Fraction(int(w), 2**64))
        assert min(d, 1 - d) < Fraction(n, 2**128) + Fraction(1, 2**64) + Fraction(1, 2**390)


@given(st.integers(1, 1000), st.integers(0, 2**32))
def test_scaled_real_matches_direct_product(h, seed):
    x = RandomReal(seed)
    v = Fraction(x.window_int(1, 600), 2**600)
    w = scaled(x, h).window_int(1, 200)
    exact = (h * v) % 1
    assert abs(Fraction(w, 2**200) - exact) < Fraction(2, 2**200)


def test_fixed_fraction_distances():
    ff = FixedFraction(3, 8)
    assert ff.distance_units() == 3
    assert FixedFraction(250, 8).distance_units() == 6
    assert FixedFraction(130, 8).half_distance_units() == 2
    assert float(FixedFraction(64, 8)) == 0.25


@pytest.mark.parametrize("spec,value", [
    ("1/3", Fraction(1, 3)), ("0.25", Fraction(1, 4)), ("0b011", Fraction(3, 8)),
    ("0x8", Fraction(1, 2)), ("7/3", Fraction(1, 3)),
])
def test_parse_alpha_rationals(spec, value):
    assert parse_alpha(spec).value == value


def test_parse_alpha_rules():
    assert parse_alpha("gamma").digit_window(1, 8).tolist() == bits("10010110")
    assert parse_alpha("paper-4a:3").describe() == "paper-4a:3"
    assert parse_alpha("random:5").window_int(1, 64) == RandomReal(5).window_int(1, 64)


@pytest.mark.parametrize("spec", ["foo", "0b012", "random", "paper-4a:x", "1/0", "0xzz"])
def test_parse_alpha_rejects(spec):
    with pytest.raises(ConfigError):
        parse_alpha(spec)


def test_window_arguments_validated():
    with pytest.raises(ConfigError):
        RationalReal(1, 3).digit_window(0, 4)
    with pytest.raises(ConfigError):
        RuleReal("no-such-rule")
    with pytest.raises(PrecisionError):
        RationalReal(1, 3, valid_digits=10).digit_window(5, 10)


def test_paper_4a_rule_matches_truncated_rational():
    from tmk.examples import build_alpha_4a

    exact = build_alpha_4a(6)
    rule = RuleReal("paper-4a", 6)
    assert np.array_equal(exact.digit_window(1, 250), rule.digit_window(1, 250))
    assert np.array_equal(RuleReal("paper-4a").digit_window(1, 250), rule.digit_window(1, 250))
