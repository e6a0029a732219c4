import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import cf_exact, gcd_sum_bruteforce, star_disc_bruteforce
from tmk.binreal import RandomReal, RationalReal, RuleReal
from tmk.discrepancy import (GCD_CAP, PointSet, cf_disc_bound, cf_expand, erdos_turan_bound,
                             erdos_turan_points, explicit_lower_bound, gcd_sum, koksma_check,
                             star_disc)
from tmk.errors import ConfigError, PrecisionError, SizeError
from tmk.expsum import direct_sum, product_identity

point_lists = st.lists(st.builds(Fraction, st.integers(0, 63), st.just(64)), min_size=1, max_size=64)


def test_star_disc_examples():
    assert star_disc(PointSet.from_floats([0.5])) == 0.5
    grid = [(2 * i - 1) / 16 for i in range(1, 9)]
    assert star_disc(PointSet.from_floats(grid)) == 1 / 16
    ps = PointSet.from_fractions([Fraction(1, 3), Fraction(2, 3)])
    assert star_disc(ps, exact=True) == Fraction(1, 3)


@given(point_lists)
def test_star_disc_exact_matches_bruteforce(pts):
    ps = PointSet.from_fractions(pts)
    assert star_disc(ps, exact=True) == star_disc_bruteforce(pts)
    # dyadic points are exact in 64 bits; only the final division rounds
    assert star_disc(ps) == pytest.approx(float(star_disc_bruteforce(pts)), rel=4e-16)


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=200))
def test_star_disc_float_path(xs):
    ps = PointSet.from_floats(xs)
    assert star_disc(ps) == pytest.approx(float(star_disc(ps, exact=True)), abs=1e-15)


def test_point_set_validation():
    with pytest.raises(ConfigError):
        PointSet.from_floats([1.0])
    with pytest.raises(ConfigError):
        PointSet(np.zeros(0, dtype=np.uint64))


def test_erdos_turan_examples():
    ps = PointSet.from_floats([0.0])
    assert erdos_turan_points(ps, 1) == pytest.approx(1.5, abs=1e-12)
    assert star_disc(ps) == 1.0
    third = RationalReal(1, 3)
    kr = PointSet.kronecker(third, 12)
    assert erdos_turan_points(kr, 6) >= star_disc(kr)
    x = RandomReal(7)
    tmk = PointSet.thue_morse_kronecker(x, 2**10)
    assert erdos_turan_bound(x, 2**10, 2**6) >= star_disc(tmk)


def test_explicit_lower_bound_examples():
    zero = RationalReal(0)
    s = direct_sum(zero, 1, 20)
    assert explicit_lower_bound(s, 1, 20) == pytest.approx(0.25)
    assert star_disc(PointSet.thue_morse_kronecker(zero, 20)) == 1.0
    third = RationalReal(1, 3)
    assert explicit_lower_bound(direct_sum(third, 1, 9), 1, 9) <= star_disc(
        PointSet.thue_morse_kronecker(third, 9))
    g = RuleReal("thue-morse")
    lb = explicit_lower_bound(product_identity(g, 1, 16), 1, 2**16)
    assert lb <= star_disc(PointSet.thue_morse_kronecker(g, 2**16))


@given(st.integers(0, 2**32), st.integers(1, 2000), st.integers(1, 12))
def test_sandwich(seed, N, H):
    x = RandomReal(seed)
    ps = PointSet.thue_morse_kronecker(x, N)
    D = star_disc(ps)
    for h in range(1, H + 1):
        assert explicit_lower_bound(direct_sum(x, h, N), h, N) <= D + ps.slack()
    assert D <= erdos_turan_bound(x, N, H) + ps.slack()
    assert D <= erdos_turan_points(ps, H) + ps.slack()


def test_koksma_examples():
    grid = PointSet.from_floats([(2 * i - 1) / 20 for i in range(1, 11)])
    r = koksma_check("identity", grid)
    assert r.lhs == pytest.approx(0.0, abs=1e-15) and r.holds
    r = koksma_check("indicator", PointSet.from_floats([0.25]), a=0.5)
    assert r.lhs == 0.5 and r.rhs == 0.75 and r.holds
    with pytest.raises(ConfigError):
        koksma_check("sin", grid)


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=100, max_size=100),
       st.floats(0, 1))
def test_koksma_random(xs, a):
    ps = PointSet.from_floats(xs)
    assert koksma_check("identity", ps).holds
    assert koksma_check("indicator", ps, a=a).holds


def test_cf_examples():
    cf = cf_expand(RationalReal(1, 3), 5)
    assert cf.coefficients == (3,) and cf.terminated and not cf.truncated
    a4 = cf_expand(RuleReal("paper-4a"), 200, guard=4096)
    assert len(a4.coefficients) == 200 and max(a4.coefficients) == 162
    g = cf_expand(RuleReal("thue-morse"), 400, guard=65536)
    assert len(g.coefficients) == 400 and max(g.coefficients) > 10**5


@given(st.integers(1, 10**12), st.integers(2, 10**12))
def test_cf_exact_rationals(p, q):
    fr = Fraction(p, q) % 1
    cf = cf_expand(RationalReal(fr), 100)
    assert list(cf.coefficients) == cf_exact(fr, 100)


@given(st.integers(0, 2**32))
def test_cf_convergent_inequality(seed):
    x = RandomReal(seed)
    cf = cf_expand(x, 40, guard=512)
    v = Fraction(x.window_int(1, 2048), 2**2048)
    p, q = cf.numerators, cf.denominators
    for i in range(len(cf.coefficients) - 1):
        assert abs(v - Fraction(p[i], q[i])) < Fraction(1, q[i] * q[i + 1])
    assert all(a >= 1 for a in cf.coefficients)
    assert all(a < b for a, b in zip(q[1:], q[2:]))


def test_cf_truncation_flag_and_strict():
    cf = cf_expand(RandomReal(1), 500, guard=64)
    assert cf.truncated and len(cf.coefficients) < 500
    with pytest.raises(PrecisionError):
        cf_expand(RandomReal(1), 500, guard=64, strict=True)


def test_cf_disc_bound_examples():
    fib = cf_expand(RationalReal(Fraction(832040, 1346269)), 40)  # F30/F31
    q10 = fib.denominators[9]
    b = cf_disc_bound(fib, q10)
    assert b.upper_order == b.lower_order
    assert b.m == 10
    assert cf_disc_bound(fib, q10).upper_order == sum(fib.coefficients[:10])
    sat = cf_disc_bound(cf_expand(RationalReal(1, 3), 5), 100)
    assert sat.saturated and sat.upper_order == 3


def test_golden_like_sum_is_index():
    ones = cf_expand(RationalReal(Fraction(832040, 1346269)), 28)
    assert ones.coefficients[:25] == (1,) * 25
    assert cf_disc_bound(ones, ones.denominators[9]).upper_order == 10


def test_kronecker_4a_against_cf_bound():
    x = RuleReal("paper-4a")
    N = 2**20
    cf = cf_expand(x, 64, guard=4096)
    b = cf_disc_bound(cf, N)
    ND = N * star_disc(PointSet.kronecker(x, N))
    assert not b.saturated
    assert ND <= 10 * b.upper_order


def test_gcd_sum_examples():
    assert gcd_sum([1.0]) == pytest.approx(0.5)
    assert gcd_sum([1.0, 0.5]) == pytest.approx(0.5 + 1 / (2 * math.sqrt(2)) + 1 / 8)
    a = 1.0 / np.arange(1, 4097)
    assert gcd_sum(a) >= 0.5 * float(np.sum(a**2))
    with pytest.raises(SizeError):
        gcd_sum(np.ones(GCD_CAP + 1))


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40))
def test_gcd_sum_bruteforce(a):
    assert gcd_sum(a) == pytest.approx(gcd_sum_bruteforce(a), rel=1e-12, abs=1e-14)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=60))
def test_gcd_sum_monotone_in_J(a):
    vals = [gcd_sum(a[:J]) for J in range(1, len(a) + 1)]
    assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))
