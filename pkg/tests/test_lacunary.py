import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk.binreal import FixedFraction, RandomReal, RationalReal
from tmk.errors import ConfigError, SingularityError, ToleranceError
from tmk.lacunary import (f1, f2, fourier_coeff, lacunary_square_integral, sigma2_fourier_series,
                          sigma_f, sigma_increment, sup_bound, trace)

LOG2 = math.log(2.0)


@pytest.mark.parametrize("x,val", [(Fraction(1, 2), LOG2), (Fraction(1, 6), 0.0),
                                   (Fraction(1, 4), 0.5 * LOG2)])
def test_f1_examples(x, val):
    assert f1(x) == pytest.approx(val, abs=1e-15)


@pytest.mark.parametrize("x,val", [(0, LOG2), (Fraction(1, 3), 0.0), (Fraction(1, 4), 0.5 * LOG2)])
def test_f2_examples(x, val):
    assert f2(x) == pytest.approx(val, abs=1e-15)


def test_singular_inputs_raise_with_distance():
    with pytest.raises(SingularityError) as e:
        f1(FixedFraction(1, 64))
    assert e.value.distance == 2.0**-64
    with pytest.raises(SingularityError):
        f2(Fraction(1, 2))
    assert math.isfinite(f1(FixedFraction(4, 64)))


def test_trace_one_fifth():
    t = trace(RationalReal(1, 5), 4)
    assert math.exp(t.partial_f1[4]) == pytest.approx(5.0, rel=1e-14)
    assert t.log_pi == pytest.approx(math.log(5.0) + t.f1[4], abs=1e-14)


def test_trace_one_third_f2():
    t = trace(RationalReal(1, 3), 2)
    assert abs(t.partial_f2[2]) < 1e-15


def test_trace_singular_reports_index():
    with pytest.raises(SingularityError) as e:
        trace(RationalReal(3, 8), 5)
    assert e.value.index == 2  # {4 * 3/8} = 1/2 is a zero of f2
    with pytest.raises(ConfigError):
        trace(RationalReal(1, 3), 0)


def test_trace_conventions():
    t = trace(RationalReal(1, 7), 9)
    assert t.partial_f1[0] == 0.0
    assert t.partial_f1.size == 10 and t.f1.size == 10
    rows = list(t.rows())
    assert rows[-1][3] == pytest.approx(t.log_pi, abs=1e-14)


@given(st.integers(0, 2**32), st.integers(1, 4096))
def test_telescoping_identity(seed, L):
    t = trace(RandomReal(seed), L)
    assert abs(t.partial_f2[L] - t.telescoped_f2()) < 1e-9 + t.residual_f2


@given(st.integers(0, 2**32), st.integers(1, 64))
def test_sup_bound_random(seed, L):
    lhs, rhs, holds = sup_bound(RandomReal(seed), L)
    assert holds and lhs <= rhs + 1e-12 * (L + 1)


def test_sup_bound_is_sharp_at_one_third():
    lhs, rhs, holds = sup_bound(RationalReal(1, 3), 20)
    assert holds
    assert lhs == pytest.approx(rhs + math.log(math.sqrt(3) / 2), abs=1e-12)


@given(st.integers(0, 2**32), st.integers(2, 3000))
def test_compensated_sum_within_residual(seed, L):
    t = trace(RandomReal(seed), L)
    ref = math.fsum(t.f1[:L].tolist())
    rev = math.fsum(t.f1[:L][::-1].tolist())
    assert abs(t.partial_f1[L] - ref) <= t.residual_f1
    assert abs(t.partial_f1[L] - rev) <= t.residual_f1


def test_fourier_coefficients():
    assert fourier_coeff("f1", 1) == -1
    assert fourier_coeff("f2", 2) == Fraction(-1, 2)
    assert fourier_coeff("f1", 10) == Fraction(-1, 10)
    assert fourier_coeff("f2", 3) == Fraction(1, 3)
    with pytest.raises(ConfigError):
        fourier_coeff("f1", 0)
    with pytest.raises(ConfigError):
        fourier_coeff("f3", 1)


def test_parseval_against_quadrature():
    J = 10**6
    j = np.arange(1, J + 1, dtype=np.float64)
    coeff_sq = float(np.sum(1.0 / j[::-1] ** 2))
    assert coeff_sq == pytest.approx(math.pi**2 / 6, abs=1.1 / J)
    # int f1^2 = sum a_j^2 * int cos^2 = sum a_j^2 / 2
    V1 = lacunary_square_integral("f1", 1)
    assert abs(V1 - 0.5 * coeff_sq) < 1e-6


def fourier_variance(which, m, jmax=200000):
    """int (sum_{r<m} f(2^r x))^2 dx = sum_{r,s<m} sum_j a_{j 2^d} a_j / 2, d = |r - s|."""
    j = np.arange(1, jmax + 1, dtype=np.float64)
    total = 0.0
    for d in range(m):
        jj = j * 2**d
        if which == "f1":
            prod = (1.0 / jj) * (1.0 / j)
        else:
            sj = np.where(j % 2 == 1, 1.0, -1.0)
            sjj = np.where(jj % 2 == 1, 1.0, -1.0)
            prod = sjj * sj / (jj * j)
        inner = 0.5 * float(np.sum(prod[::-1]))
        total += (m if d == 0 else 2 * (m - d)) * inner
    return total


@pytest.mark.parametrize("which", ["f1", "f2"])
@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
def test_sigma_quadrature_matches_fourier_oracle(which, m):
    est = sigma_f(which, m)
    assert est.V == pytest.approx(fourier_variance(which, m), abs=2e-5 * m)
    assert est.value == pytest.approx(est.V / m)
    assert est.error < 1e-7 * max(1.0, est.V)


def test_f2_single_term_variance():
    # one term: int f2^2 = sum_j (1/j^2) / 2 = pi^2 / 12
    assert sigma_f("f2", 1).V == pytest.approx(math.pi**2 / 12, abs=1e-10)


def test_sigma_increments_approach_limits():
    # V_m - V_{m-1} tends to 3 pi^2/12 for f1 and to 0 for f2
    assert sigma_increment("f1", 9) == pytest.approx(math.pi**2 / 4, abs=1e-2)
    assert abs(sigma_increment("f2", 9)) < 1e-2


def test_sigma_fourier_series_limits():
    assert sigma2_fourier_series("f1", 10**6) == pytest.approx(math.pi**2 / 2, abs=1e-5)
    assert abs(sigma2_fourier_series("f2", 10**6)) < 1e-5


def test_sigma_tolerance_error():
    with pytest.raises(ToleranceError):
        sigma_f("f1", 3, tol=1e-30)
