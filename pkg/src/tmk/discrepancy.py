"""Star discrepancy, its exponential-sum bounds, continued fractions, GCD sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .binreal import DEFAULT_GUARD, RationalReal, mul_windows
from .errors import ConfigError, PrecisionError, SizeError
from .expsum import direct_sum
from .thue_morse import evil_stream

_TWO64 = 2**64
GCD_CAP = 1 << 14


@dataclass
class PointSet:
    """Points in [0, 1) as 64-bit fixed point (value u / 2^64).

    ``error`` bounds |u/2^64 - true point| for every point. ``exact`` may hold
    the true values as Fractions when they are known.
    """

    values: np.ndarray
    label: str = ""
    error: float = 0.0
    exact: list | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.uint64)
        if self.values.size < 1:
            raise ConfigError("a point set needs at least one point")

    @property
    def N(self):
        return int(self.values.size)

    def as_float(self):
        return self.values.astype(np.float64) / float(_TWO64)

    @classmethod
    def from_floats(cls, x, label="floats"):
        x = np.asarray(x, dtype=np.float64)
        if ((x < 0) | (x >= 1)).any():
            raise ConfigError("points must lie in [0, 1)")
        # doubles in [0,1) scale by 2^64 exactly; the cast then truncates nothing
        return cls(np.ldexp(x, 64).astype(np.uint64), label, 0.0, [Fraction(float(v)) for v in x])

    @classmethod
    def from_fractions(cls, fr, label="fractions"):
        fr = [Fraction(v) for v in fr]
        if any(v < 0 or v >= 1 for v in fr):
            raise ConfigError("points must lie in [0, 1)")
        u = np.array([math.floor(v * _TWO64) for v in fr], dtype=np.uint64)
        return cls(u, label, 2.0**-64, fr)

    @classmethod
    def kronecker(cls, alpha, N):
        """{n alpha}, n = 1..N."""
        n = np.arange(1, N + 1, dtype=np.uint64)
        return cls(mul_windows(alpha, n), f"kronecker({alpha.describe()}, N={N})", _mul_error(alpha, N))

    @classmethod
    def thue_morse_kronecker(cls, alpha, N):
        """{n_k alpha}, k = 1..N, over the evil numbers."""
        n = evil_stream(N).astype(np.uint64)
        return cls(mul_windows(alpha, n), f"tmk({alpha.describe()}, N={N})", _mul_error(alpha, int(n[-1])))

    def slack(self):
        """Moving every point by at most ``error`` moves D* by at most twice that."""
        return 2.0 * self.error


def _mul_error(alpha, nmax):
    if isinstance(alpha, RationalReal) and alpha.exact and alpha.denominator < 1 << 32:
        return 2.0**-64
    return nmax * 2.0**-128 + 2.0**-64


def star_disc(ps, exact=False):
    """D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted points.

    Sorting compares the integer windows, never rounded doubles. With
    ``exact=True`` the formula is evaluated in rationals (on ``ps.exact`` when
    present, else on u / 2^64) and a Fraction is returned.
    """
    if not exact:
        return kernels.star_disc_sorted(np.sort(ps.values))
    pts = sorted(ps.exact) if ps.exact is not None else [Fraction(int(v), _TWO64) for v in np.sort(ps.values)]
    N = len(pts)
    best = Fraction(0)
    for i, x in enumerate(pts, start=1):
        best = max(best, Fraction(i, N) - x, x - Fraction(i - 1, N))
    return best


def erdos_turan_bound(alpha, N, H, sum_provider=None, guard=DEFAULT_GUARD):
    """1/(H+1) + sum_{h<=H} |S_h(N)| / (h N) for the points {n_k alpha}.

    ``sum_provider(h)`` may supply the sums (any object with ``abs`` and an
    ``error_bound``); the default is ``expsum.direct_sum``. Error bounds of the
    sums are added, so the result stays an upper bound.
    """
    if H < 1:
        raise ConfigError("H must be >= 1")
    if sum_provider is None:
        def sum_provider(h):
            return direct_sum(alpha, h, N, guard)
    total = 1.0 / (H + 1)
    for h in range(1, H + 1):
        s = sum_provider(h)
        total += (abs(s) + s.error_bound) / (h * N)
    return total


def erdos_turan_points(ps, H):
    """Same bound computed straight from a point set's 64-bit values."""
    if H < 1:
        raise ConfigError("H must be >= 1")
    total = 1.0 / (H + 1)
    N = ps.N
    for h in range(1, H + 1):
        re, im = kernels.phase_sum(ps.values * np.uint64(h))
        err = N * (2 * math.pi * h * ps.error + 1e-15) + 1e-15 * N * math.log2(N + 1)
        total += (math.hypot(re, im) + err) / (h * N)
    return total


def explicit_lower_bound(S_H, H, N):
    """|S_H| / (4 H N), minus the sum's own error bound."""
    if H < 1 or N < 1:
        raise ConfigError("need H >= 1 and N >= 1")
    err = getattr(S_H, "error_bound", 0.0)
    return max(0.0, (abs(S_H) - err) / (4.0 * H * N))


@dataclass(frozen=True)
class KoksmaResult:
    lhs: float
    rhs: float
    holds: bool


def koksma_check(f, ps, a=0.5, tol=1e-12):
    """Compare |int f - mean f(x_k)| with Var(f) D*_N.

    ``f`` is ``"identity"`` (x -> x) or ``"indicator"`` (x -> 1 if x <= a).
    """
    x = ps.as_float()
    D = star_disc(ps)
    if f == "identity":
        lhs = abs(0.5 - float(np.mean(x)))
        var = 1.0
    elif f == "indicator":
        if not 0.0 <= a <= 1.0:
            raise ConfigError("indicator cut a must lie in [0, 1]")
        lhs = abs(a - float(np.mean(x <= a)))
        var = 0.0 if a >= 1.0 else 1.0
    else:
        raise ConfigError(f"unknown test function {f!r}; use identity or indicator")
    rhs = var * D
    return KoksmaResult(lhs, rhs, lhs <= rhs + tol + ps.slack())


# -- continued fractions -----------------------------------------------------

@dataclass(frozen=True)
class CFExpansion:
    """alpha = [0; a_1, a_2, ...] with q_0 = 1, q_1 = a_1, q_n = a_n q_(n-1) + q_(n-2).

    ``truncated`` is set when fewer than the requested coefficients could be
    certified; ``terminated`` when the expansion is exact and finite.
    """

    coefficients: tuple
    denominators: tuple
    requested: int
    truncated: bool
    terminated: bool
    source: str = ""

    @property
    def numerators(self):
        p = [1, 0]  # p_-1, p_0 for alpha in (0, 1)
        for a in self.coefficients:
            p.append(a * p[-1] + p[-2])
        return tuple(p[2:])


def _cf_step(x):
    """One CF step on a Fraction in (0, 1): (a, {1/x})."""
    y = 1 / x
    a = math.floor(y)
    return a, y - a


def _cf_exact(x, depth):
    out = []
    x -= math.floor(x)
    while x and len(out) < depth:
        a, x = _cf_step(x)
        out.append(a)
    return out, x == 0


def cf_expand(alpha, depth, guard=DEFAULT_GUARD, strict=False):
    """Certified CF prefix of alpha.

    Exact rationals are expanded exactly. Otherwise alpha lies in
    [v, v + 1] / 2^guard and the common prefix of the expansions of both
    endpoints is returned. ``strict=True`` turns a short prefix into a
    PrecisionError.
    """
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if isinstance(alpha, RationalReal) and alpha.exact:
        coeffs, done = _cf_exact(alpha.value, depth)
        return _finish(coeffs, depth, False, done, alpha.describe())
    v = alpha.window_int(1, guard)
    lo = Fraction(v, 1 << guard)
    hi = Fraction(v + 1, 1 << guard)
    coeffs = []
    while len(coeffs) < depth:
        if lo == 0 or hi == 0:
            break
        a_lo, r_lo = _cf_step(lo)
        a_hi, r_hi = _cf_step(hi)
        if a_lo != a_hi:
            break
        coeffs.append(a_lo)
        # the map x -> {1/x} reverses order on each branch
        lo, hi = r_hi, r_lo
        if lo == 0:
            break
    truncated = len(coeffs) < depth
    if truncated and strict:
        raise PrecisionError(
            f"only {len(coeffs)} of {depth} CF coefficients certified with {guard} bits")
    return _finish(coeffs, depth, truncated, False, alpha.describe())


def _finish(coeffs, depth, truncated, terminated, source):
    q = [1]
    prev = 0
    for a in coeffs:
        q, prev = q + [a * q[-1] + prev], q[-1]
    return CFExpansion(tuple(coeffs), tuple(q[1:]), depth, truncated, terminated, source)


@dataclass(frozen=True)
class CFBound:
    """sum_{n<=m(N)} a_n, the order of N D*_N for the Kronecker sequence.

    ``lower_order`` and ``upper_order`` are the same number; the absolute
    constants in front of it are not part of the result.
    """

    lower_order: int
    upper_order: int
    m: int
    saturated: bool


def cf_disc_bound(cf, N):
    """m(N) from q_(m-1) < N <= q_m; saturates at the last known denominator."""
    if N < 1:
        raise ConfigError("N must be >= 1")
    q = (1,) + cf.denominators
    m = next((i for i in range(len(q)) if q[i] >= N), None)
    saturated = m is None
    if saturated:
        m = len(cf.coefficients)
    s = sum(cf.coefficients[:m])
    return CFBound(s, s, m, saturated)


# -- GCD sums ----------------------------------------------------------------

def gcd_sum(coeffs, cap=GCD_CAP):
    """sum_{j1, j2 <= J} |a_j1 a_j2| / 2 * gcd(j1, j2) / sqrt(j1 j2)."""
    a = np.abs(np.asarray(coeffs, dtype=np.float64))
    if a.ndim != 1 or a.size < 1:
        raise ConfigError("coefficients must be a non-empty 1-d array")
    if a.size > cap:
        raise SizeError(f"J = {a.size} exceeds the GCD-sum cap {cap}")
    return kernels.gcd_sum(a)
