"""Exponential sums S_h(N) = sum_{k<=N} exp(2 pi i h n_k alpha) over evil numbers.

Three evaluators that must agree:

* ``direct_sum`` adds the N phases {h n_k alpha} (128-bit fixed point).
* ``product_identity`` uses, for N = 2^L,
  S_h(2^L) = 1/2 prod_{l=0}^{L} (1 + z_l) + 1/2 prod_{l=0}^{L} (1 - z_l),
  z_l = exp(2 pi i h 2^l alpha).
* ``dyadic_sum`` splits N by its binary digits and reuses the same products;
  chunks over odious numbers flip the sign of the second product.

Negative h is handled as the complex conjugate of S_|h|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .binreal import DEFAULT_GUARD, frac_mul, mul_windows, scaled, shift_distances
from .errors import ConfigError
from .thue_morse import evil_stream, tm_bit

_EPS = float(np.finfo(np.float64).eps)
_TWO64 = float(2**64)
# abs error of one factor 1 +- z: angle error 2 pi (2^-64 window + 2^-64 scaling) plus rounding
_FACTOR_DELTA = 4.0 * math.pi * 2.0**-64 + 8.0 * _EPS
LOG_POLAR_ABOVE = 48
_CHUNK = 1 << 20


@dataclass(frozen=True)
class ExpSum:
    """S = exp(log_scale) * (re + i im), with |computed - exact| <= error_bound.

    ``log_scale`` is 0 unless a product was too large for doubles. ``log_sin``
    and ``log_cos`` carry log prod |2 sin| and log prod |2 cos| when the
    product identity was used.
    """

    re: float
    im: float
    N: int
    h: int
    method: str
    error_bound: float
    ops: int = 0
    log_scale: float = 0.0
    log_sin: float | None = None
    log_cos: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def value(self):
        return complex(self.re, self.im) * math.exp(self.log_scale)

    @property
    def log_abs(self):
        a = math.hypot(self.re, self.im)
        return self.log_scale + (math.log(a) if a > 0 else -math.inf)

    def __abs__(self):
        return math.exp(self.log_abs) if self.log_abs > -math.inf else 0.0

    def conjugate(self):
        return ExpSum(self.re, -self.im, self.N, -self.h, self.method, self.error_bound,
                      self.ops, self.log_scale, self.log_sin, self.log_cos, dict(self.extra))


def _check_h(h):
    h = int(h)
    if h == 0:
        raise ConfigError("frequency h must be nonzero")
    return h


def direct_sum(alpha, h, N, guard=DEFAULT_GUARD):
    """Sum the phases {h n_k alpha} for k = 1..N.

    Phases come from a 128-bit window of alpha (exact for rationals with
    denominator < 2^32), so each angle is off by at most 2 pi (h n 2^-128 + 2^-64).
    ``guard`` is accepted for symmetry with the other evaluators.
    """
    h = _check_h(h)
    if N < 1:
        raise ConfigError("N must be >= 1")
    if h < 0:
        return direct_sum(alpha, -h, N, guard).conjugate()
    re = im = 0.0
    nmax = 0
    for start in range(1, N + 1, _CHUNK):
        cnt = min(_CHUNK, N + 1 - start)
        n = evil_stream(cnt, start).astype(np.uint64) * np.uint64(h)
        nmax = int(n[-1])
        r, i = kernels.phase_sum(mul_windows(alpha, n))
        re += r
        im += i
    angle = 2.0 * math.pi * (nmax * 2.0**-128 + 2.0**-64 + _EPS)
    err = N * (angle + 4.0 * _EPS) + N * math.log2(N + 1) * _EPS
    return ExpSum(re, im, N, h, "direct", err, ops=N)


@dataclass
class _Factors:
    u: np.ndarray       # top 64 bits of {2^l h alpha}
    log_cos: np.ndarray  # log|2 cos(pi x_l)|
    log_sin: np.ndarray  # log|2 sin(pi x_l)|
    neg_cos: np.ndarray  # cos(pi x_l) < 0


def _factors(alpha, h, count, guard):
    u, d0, dh, _, _ = shift_distances(scaled(alpha, h), count, guard)
    with np.errstate(divide="ignore"):
        lc = np.log(2.0 * np.sin(np.pi * dh))
        ls = np.log(2.0 * np.sin(np.pi * d0))
    return _Factors(u, lc, ls, u > np.uint64(1 << 63))


def _half_phase(u):
    """pi * sum(x_l) mod 2 pi, from the exact integer sum of the windows."""
    total = 2 * int(np.sum(u >> np.uint64(1), dtype=np.uint64)) + int(np.sum(u & np.uint64(1)))
    return math.pi * ((total % (1 << 65)) / _TWO64)


def _perturbed(logs):
    """log prod (|a_l| + delta): bounds |prod(a_l + e_l) - prod(a_l)| with |e_l| <= delta."""
    return float(np.sum(np.log(np.exp(logs) + _FACTOR_DELTA)))


def _polar_parts(f, L):
    """(phase, sign, log_cos, log_sin) for the products over l = 0..L."""
    lc = float(np.sum(f.log_cos[: L + 1]))
    ls = float(np.sum(f.log_sin[: L + 1]))
    sign = -1.0 if int(np.count_nonzero(f.neg_cos[: L + 1])) % 2 else 1.0
    return _half_phase(f.u[: L + 1]), sign, lc, ls


def _minus_i_power(n):
    return (1, -1j, -1, 1j)[n % 4]


def _combine(phase, sign, lc, ls, L, odious, scale):
    # 1 + z = 2 cos(pi x) e^{i pi x};  1 - z = -2i sin(pi x) e^{i pi x}
    plus = sign * math.exp(lc - scale) if lc > -math.inf else 0.0
    minus = _minus_i_power(L + 1) * (math.exp(ls - scale) if ls > -math.inf else 0.0)
    s = 0.5 * (plus - minus) if odious else 0.5 * (plus + minus)
    return complex(math.cos(phase), math.sin(phase)) * s


def _product_error(f, L, scale):
    lc = f.log_cos[: L + 1]
    ls = f.log_sin[: L + 1]
    e = 0.0
    for logs in (lc, ls):
        exact = float(np.sum(logs))
        pert = _perturbed(logs)
        e += 0.5 * (math.exp(pert - scale) - (math.exp(exact - scale) if exact > -math.inf else 0.0))
    return e + 8.0 * _EPS * (L + 2) * math.exp(max(float(np.sum(lc)), float(np.sum(ls))) - scale)


def product_identity(alpha, h, L, guard=DEFAULT_GUARD, log_polar=None):
    """S_h(2^L) from the two (L+1)-factor products.

    Up to L = 48 the products are multiplied out as complex numbers; beyond
    that they are kept in log-polar form and the result carries ``log_scale``.
    ``log_polar`` forces one path or the other.
    """
    h = _check_h(h)
    if L < 0:
        raise ConfigError("L must be >= 0")
    if h < 0:
        return product_identity(alpha, -h, L, guard, log_polar).conjugate()
    f = _factors(alpha, h, L + 1, guard)
    phase, sign, lc, ls = _polar_parts(f, L)
    if log_polar is None:
        log_polar = L > LOG_POLAR_ABOVE
    if not log_polar:
        z = np.exp(2j * np.pi * (f.u.astype(np.float64) / _TWO64))
        s = 0.5 * np.prod(1.0 + z) + 0.5 * np.prod(1.0 - z)
        scale = 0.0
    else:
        scale = max(lc, ls)
        s = _combine(phase, sign, lc, ls, L, False, scale)
    err = _product_error(f, L, scale)
    return ExpSum(s.real, s.imag, 1 << L, h, "product", err, ops=L + 1,
                  log_scale=scale, log_sin=ls, log_cos=lc)


def chunk_products(alpha, h, L, odious=False, guard=DEFAULT_GUARD):
    """sum_{k<=2^L} exp(2 pi i h x_k alpha) with x_k = n_k (or m_k if ``odious``)."""
    h = _check_h(h)
    f = _factors(alpha, abs(h), L + 1, guard)
    phase, sign, lc, ls = _polar_parts(f, L)
    s = _combine(phase, sign, lc, ls, L, odious, 0.0)
    return s.conjugate() if h < 0 else s


def dyadic_sum(alpha, h, N, guard=DEFAULT_GUARD):
    """S_h(N) by the binary digits of N.

    For N = sum_mu eta_mu 2^mu, the block k = N_mu + 1 .. N_mu + 2^mu (N_mu the
    higher part of N) has n_{N_mu + k} = 2 N_mu + n_k or 2 N_mu + m_k by the
    parity of s_2(N_mu); it contributes exp(2 pi i h 2 N_mu alpha) times a
    product over l = 0..mu. The factor table is computed once for the
    largest mu, so the work is O(log N) factors plus one phase per chunk.
    """
    h = _check_h(h)
    if N < 1:
        raise ConfigError("N must be >= 1")
    if h < 0:
        return dyadic_sum(alpha, -h, N, guard).conjugate()
    top = N.bit_length() - 1
    f = _factors(alpha, h, top + 1, guard)
    total = 0j
    err = 0.0
    N_mu = 0
    chunks = []
    for mu in range(top, -1, -1):
        if not (N >> mu) & 1:
            continue
        odious = tm_bit(N_mu) == 1
        phase, sign, lc, ls = _polar_parts(f, mu)
        chunk = _combine(phase, sign, lc, ls, mu, odious, 0.0)
        if N_mu:
            shift = frac_mul(alpha, 2 * h * N_mu, guard)
            theta = 2.0 * math.pi * float(shift)
            chunk *= complex(math.cos(theta), math.sin(theta))
            err += (2.0 * math.pi * 2.0 ** (1 - guard) + 4.0 * _EPS) * (1 << mu)
        err += _product_error(f, mu, 0.0)
        total += chunk
        chunks.append((N_mu, mu, odious))
        N_mu += 1 << mu
    err += 4.0 * _EPS * N * len(chunks)
    return ExpSum(total.real, total.imag, N, h, "dyadic", err,
                  ops=top + 1 + len(chunks), extra={"chunks": chunks})


def evaluate(alpha, h, N, method="direct", guard=DEFAULT_GUARD):
    """Dispatch by method name; ``product`` needs N to be a power of two."""
    if method == "direct":
        return direct_sum(alpha, h, N, guard)
    if method == "dyadic":
        return dyadic_sum(alpha, h, N, guard)
    if method == "product":
        if N < 1 or N & (N - 1):
            raise ConfigError("method 'product' needs N = 2^L")
        return product_identity(alpha, h, N.bit_length() - 1, guard)
    raise ConfigError(f"unknown method {method!r}; use direct, product or dyadic")


def product_series(alpha, h, Ls, guard=DEFAULT_GUARD):
    """product_identity at several L from one factor table (log-polar throughout)."""
    h = _check_h(h)
    Ls = [int(L) for L in Ls]
    if min(Ls) < 0:
        raise ConfigError("L must be >= 0")
    f = _factors(alpha, abs(h), max(Ls) + 1, guard)
    out = []
    for L in Ls:
        phase, sign, lc, ls = _polar_parts(f, L)
        scale = max(lc, ls)
        if scale == -math.inf:
            scale = 0.0
        s = _combine(phase, sign, lc, ls, L, False, scale)
        e = ExpSum(s.real, s.imag, 1 << L, abs(h), "product", _product_error(f, L, scale),
                   ops=L + 1, log_scale=scale, log_sin=ls, log_cos=lc)
        out.append(e.conjugate() if h < 0 else e)
    return out
