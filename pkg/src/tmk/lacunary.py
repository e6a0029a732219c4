"""Lacunary sums of f1 = log|2 sin pi x| and f2 = log|2 cos pi x| along 2^l.

Arguments {2^l alpha} are never formed by repeated float doubling; they come
from 64-bit digit windows of the BinaryReal, refined from a ``guard``-bit
window when they are close to a singular point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .binreal import DEFAULT_GUARD, FixedFraction, shift_distances
from .errors import ConfigError, SingularityError, ToleranceError

LOG2 = math.log(2.0)
SUP_H = math.sqrt(3.0) / 2.0
_EPS = np.finfo(np.float64).eps


def _as_fixed(x, guard=DEFAULT_GUARD):
    if isinstance(x, FixedFraction):
        return x
    fr = Fraction(x)
    fr -= math.floor(fr)
    return FixedFraction(math.floor(fr * (1 << guard)), guard, "literal")


def _log_two_sin(units, precision, which):
    if units < 4:
        raise SingularityError(
            f"{which}: argument within 2^-{precision - 2} of a singular point",
            distance=float(Fraction(units, 1 << precision)))
    d = float(Fraction(units, 1 << precision))
    return math.log(2.0 * math.sin(math.pi * d))


def f1(x):
    """log|2 sin(pi x)| for a FixedFraction (or an exact number)."""
    x = _as_fixed(x)
    return _log_two_sin(x.distance_units(), x.precision, "f1")


def f2(x):
    """log|2 cos(pi x)|; singular at x = 1/2."""
    x = _as_fixed(x)
    return _log_two_sin(x.half_distance_units(), x.precision, "f2")


def log_two_sin_dist(d):
    """log(2 sin(pi d)) for distances d in (0, 1/2]; -inf at 0."""
    with np.errstate(divide="ignore"):
        return np.log(2.0 * np.sin(np.pi * np.asarray(d, dtype=np.float64)))


def _term_error(d, values):
    # truncated 64-bit window (2^-64) plus one rounding of d, propagated by
    # |d/dd log sin(pi d)| = pi cot(pi d); then ~2 ulp for sin/log themselves
    d = np.maximum(d, 1e-300)
    slope = np.pi / np.tan(np.pi * d)
    return slope * (2.0**-64 + d * _EPS) + 2.0 * _EPS * (np.abs(values) + 1.0)


@dataclass
class LogProductTrace:
    """Per-shift record for l = 0..L.

    ``f1[l]``, ``f2[l]`` are the log-factors at {2^l alpha}. ``partial_f1[j]``
    is the compensated sum over l < j (j = 0..L), the convention of the
    integrals I_1(L). ``log_pi`` adds the l = L factor, the L+1 factor
    product used for Pi_L.
    """

    alpha: object
    L: int
    guard: int
    d0: np.ndarray
    dh: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    partial_f1: np.ndarray
    partial_f2: np.ndarray
    residual_f1: float
    residual_f2: float

    @property
    def compensation(self):
        return max(self.residual_f1, self.residual_f2)

    @property
    def log_pi(self):
        """log prod_{l=0}^{L} |2 sin(pi 2^l alpha)|."""
        return float(self.partial_f1[self.L] + self.f1[self.L])

    @property
    def log_pi_error(self):
        return self.residual_f1 + float(_term_error(self.d0[self.L:], self.f1[self.L:])[0])

    def telescoped_f2(self):
        """log(|sin pi 2^L alpha| / |sin pi alpha|), the closed form of partial_f2[L]."""
        return math.log(math.sin(math.pi * self.d0[self.L])) - math.log(math.sin(math.pi * self.d0[0]))

    def rows(self):
        for ell in range(self.L + 1):
            yield (ell, float(self.f1[ell]), float(self.f2[ell]),
                   float(self.partial_f1[ell] + self.f1[ell]),
                   float(self.partial_f2[ell] + self.f2[ell]))


def trace(alpha, L, guard=DEFAULT_GUARD):
    """Compensated partial sums of f1, f2 along {2^l alpha}, l = 0..L.

    Raises SingularityError (with the offending l) when some argument is
    within 2^-(guard-2) of a zero of the corresponding factor.
    """
    if L < 1:
        raise ConfigError("trace needs L >= 1")
    _, d0, dh, s0, sh = shift_distances(alpha, L + 1, guard)
    if s0.any() or sh.any():
        ell = int(np.flatnonzero(s0 | sh)[0])
        which = "f2" if sh[ell] else "f1"
        raise SingularityError(
            f"{which}: {{2^{ell} alpha}} is within 2^-{guard - 2} of a singular point; "
            f"retry with a larger guard", index=ell, distance=0.0)
    v1 = log_two_sin_dist(d0)
    v2 = log_two_sin_dist(dh)
    p1, a1 = kernels.neumaier_cumsum(v1[:L])
    p2, a2 = kernels.neumaier_cumsum(v2[:L])
    r1 = float(_term_error(d0[:L], v1[:L]).sum()) + 4.0 * _EPS * a1
    r2 = float(_term_error(dh[:L], v2[:L]).sum()) + 4.0 * _EPS * a2
    return LogProductTrace(alpha, L, guard, d0, dh, v1, v2, p1, p2, r1, r2)


def sup_bound(alpha, L, guard=DEFAULT_GUARD):
    """Check prod_{l=0}^{L} |sin pi 2^l alpha| <= (sqrt(3)/2)^L in log form.

    Returns ``(log_lhs, log_rhs, holds)``; a singular factor makes the
    product 0, which satisfies the bound.
    """
    _, d0, _, s0, _ = shift_distances(alpha, L + 1, guard)
    with np.errstate(divide="ignore"):
        lhs = -np.inf if s0.any() else float(np.log(np.sin(np.pi * d0)).sum())
    rhs = L * math.log(SUP_H)
    slack = 1e-12 * (L + 1)
    return lhs, rhs, bool(lhs <= rhs + slack)


def fourier_coeff(which, j):
    """Exact cosine coefficient a_j: -1/j for f1, (-1)^(j+1)/j for f2."""
    if j < 1:
        raise ConfigError("Fourier index starts at 1")
    if which == "f1":
        return Fraction(-1, j)
    if which == "f2":
        return Fraction(1 if j % 2 else -1, j)
    raise ConfigError(f"unknown function {which!r}; use f1 or f2")


def sigma2_fourier_series(which, J, R=60):
    """sum_{j<=J} (1/j^2 + 2 sum_{r=1}^{R} s_j 2^-r / j^2), s_j = 1 (f1) or (-1)^j (f2).

    The coefficient double series for the lacunary variance. It tends to
    pi^2/2 for f1 and 0 for f2. The integral in ``sigma_f`` carries an extra
    factor 1/2 (from int cos^2 = 1/2), so its f1 limit is pi^2/4.
    """
    if which not in ("f1", "f2"):
        raise ConfigError(f"unknown function {which!r}; use f1 or f2")
    j = np.arange(1, J + 1, dtype=np.float64)
    geo = 1.0 - 2.0**-R
    sign = np.ones_like(j) if which == "f1" else np.where(j % 2 == 0, 1.0, -1.0)
    return float(np.sum(1.0 / j**2 + 2.0 * geo * sign / j**2))


# -- sigma_f quadrature ------------------------------------------------------

_GL_NODES = 16


def _graded_nodes(levels, order):
    """Nodes on (0, 1) graded geometrically toward both ends.

    Returns ``(s, sbar, w)`` with sbar = 1 - s kept accurate near 1.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    edges = [0.0] + [2.0 ** -(levels - i) for i in range(levels)]  # 0, 2^-levels, ..., 1/2
    s, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s.append(a + (b - a) * x)
        ws.append((b - a) * w)
    s = np.concatenate(s)
    ws = np.concatenate(ws)
    # mirror: the right half has sbar = s of the left half
    return (np.concatenate([s, 1.0 - s]), np.concatenate([1.0 - s, s]),
            np.concatenate([ws, ws]))


def _lacunary_sum_panels(which, m, k, s, sbar):
    """sum_{r<m} f(2^r x) at x = (k + s) / 2^m for panel indices k (column) and nodes s (row)."""
    total = np.zeros((k.size, s.size))
    for r in range(m):
        M = 1 << (m - r)
        kr = (k % M).astype(np.float64)[:, None]
        if which == "f1":
            a = kr + s[None, :]
            b = (M - 1 - kr) + sbar[None, :]
            d = np.minimum(a, b) / M
        else:
            half = M // 2
            d = np.where(kr >= half, kr - half + s[None, :], half - 1 - kr + sbar[None, :]) / M
        total += np.log(2.0 * np.sin(np.pi * d))
    return total


def lacunary_square_integral(which, m, levels=40, order=_GL_NODES):
    """int_0^1 (f(x) + ... + f(2^(m-1) x))^2 dx on dyadic panels of width 2^-m.

    All singular points of the integrand sit at panel endpoints; each panel is
    graded geometrically toward its ends.
    """
    if which not in ("f1", "f2"):
        raise ConfigError(f"unknown function {which!r}; use f1 or f2")
    if m < 1:
        raise ConfigError("m must be >= 1")
    s, sbar, w = _graded_nodes(levels, order)
    npan = 1 << m
    total = 0.0
    rows = max(1, (1 << 20) // s.size)
    for start in range(0, npan, rows):
        k = np.arange(start, min(npan, start + rows), dtype=np.int64)
        vals = _lacunary_sum_panels(which, m, k, s, sbar)
        total += float((vals**2 @ w).sum())
    return total / npan


@dataclass(frozen=True)
class SigmaEstimate:
    which: str
    m: int
    V: float          # int (sum_{r<m} f(2^r x))^2 dx
    value: float      # V / m
    error: float      # quadrature error estimate for V (two-rule difference)

    @property
    def sigma(self):
        return math.sqrt(max(self.value, 0.0))


def sigma_f(which, m, tol=1e-7):
    """(1/m) int_0^1 (f(x) + ... + f(2^(m-1) x))^2 dx by singularity-aware quadrature.

    The error estimate compares Gauss-Legendre orders 16 and 12 on the same
    graded panels; ToleranceError if they disagree by more than ``tol`` (relative).
    """
    V = lacunary_square_integral(which, m, order=16)
    V_lo = lacunary_square_integral(which, m, order=12)
    err = abs(V - V_lo)
    if err > tol * max(1.0, abs(V)):
        raise ToleranceError(f"sigma_f quadrature for {which}, m={m}: rules differ by {err:.3g}")
    return SigmaEstimate(which, m, V, V / m, err)


def sigma_increment(which, m):
    """V_m - V_(m-1): the per-step growth of the lacunary variance."""
    if m < 2:
        raise ConfigError("increment needs m >= 2")
    return sigma_f(which, m).V - sigma_f(which, m - 1).V
