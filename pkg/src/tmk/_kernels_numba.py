"""numba twins of ``_kernels_numpy``. Same names, same semantics."""

import math

import numpy as np
from numba import njit, prange

_TWO64 = 18446744073709551616.0


@njit(cache=True)
def windows64(bits):
    count = bits.size - 63
    if count <= 0:
        return np.zeros(0, dtype=np.uint64)
    out = np.empty(count, dtype=np.uint64)
    w = np.uint64(0)
    for i in range(64):
        w = (w << np.uint64(1)) | np.uint64(bits[i])
    out[0] = w
    for i in range(1, count):
        w = (w << np.uint64(1)) | np.uint64(bits[i + 63])
        out[i] = w
    return out


@njit(cache=True, inline="always")
def _mulhi(a, b):
    m = np.uint64(0xFFFFFFFF)
    s = np.uint64(32)
    a0 = a & m
    a1 = a >> s
    b0 = b & m
    b1 = b >> s
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> s) + (p01 & m) + (p10 & m)
    return p11 + (p01 >> s) + (p10 >> s) + (mid >> s)


@njit(cache=True)
def _mul_frac(n, a_hi, a_lo):
    out = np.empty(n.size, dtype=np.uint64)
    for i in range(n.size):
        out[i] = n[i] * a_hi + _mulhi(n[i], a_lo)
    return out


def mul_frac_u64(n, a_hi, a_lo):
    n = np.ascontiguousarray(n, dtype=np.uint64)
    return _mul_frac(n, np.uint64(a_hi), np.uint64(a_lo))


@njit(cache=True)
def _phase_sum(u):
    scale = 2.0 * math.pi / _TWO64
    re = 0.0
    im = 0.0
    cre = 0.0
    cim = 0.0
    for i in range(u.size):
        th = float(u[i]) * scale
        y = math.cos(th) - cre
        t = re + y
        cre = (t - re) - y
        re = t
        y = math.sin(th) - cim
        t = im + y
        cim = (t - im) - y
        im = t
    return re, im


def phase_sum(u):
    re, im = _phase_sum(np.ascontiguousarray(u, dtype=np.uint64))
    return float(re), float(im)


@njit(cache=True)
def _neumaier_cumsum(values):
    out = np.empty(values.size + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    tot = 0.0
    for i in range(values.size):
        v = values[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
        tot += abs(v)
    return out, tot


def neumaier_cumsum(values):
    out, tot = _neumaier_cumsum(np.ascontiguousarray(values, dtype=np.float64))
    return out, float(tot)


@njit(cache=True)
def _star_disc_sorted(u):
    n = u.size
    best = 0.0
    for i in range(n):
        x = float(u[i]) / _TWO64
        d1 = (i + 1) / n - x
        d2 = x - i / n
        if d1 > best:
            best = d1
        if d2 > best:
            best = d2
    return best


def star_disc_sorted(u):
    return float(_star_disc_sorted(np.ascontiguousarray(u, dtype=np.uint64)))


@njit(cache=True)
def _phi_point(j, a, buf):
    size = 1 << j
    for b in range(size):
        buf[b] = 1.0
    for i in range(j, 0, -1):
        half = size >> 1
        inv = 1.0 / (1 << (i - 1))
        for b in range(half):
            y = (a + b) * inv
            buf[b] = 0.5 * (abs(math.sin(0.5 * math.pi * y)) * buf[b]
                            + abs(math.cos(0.5 * math.pi * y)) * buf[b + half])
        size = half
    return buf[0]


@njit(cache=True, parallel=True)
def _phi_values(j, alpha):
    out = np.empty(alpha.size)
    for i in prange(alpha.size):
        buf = np.empty(1 << j)
        out[i] = _phi_point(j, alpha[i], buf)
    return out


def phi_values(j, alpha):
    alpha = np.ascontiguousarray(np.atleast_1d(alpha), dtype=np.float64)
    return _phi_values(j, alpha)


@njit(cache=True, parallel=True)
def _q_values(k, alpha):
    out = np.empty(alpha.size)
    for i in prange(alpha.size):
        buf = np.empty(1 << k)
        top = _phi_point(k, alpha[i], buf)
        out[i] = top / _phi_point(k - 1, alpha[i], buf)
    return out


def q_values(k, alpha):
    alpha = np.ascontiguousarray(np.atleast_1d(alpha), dtype=np.float64)
    return _q_values(k, alpha)


def grid_q_extrema(k, npoints, step):
    best_min, arg_min = np.inf, -1
    best_max, arg_max = -np.inf, -1
    chunk = 1 << 20
    for s in range(0, npoints, chunk):
        n = min(chunk, npoints - s)
        q = _grid_q_offset(k, s, n, step)
        if not np.all(np.isfinite(q)):
            raise FloatingPointError("non-finite q_k value on grid")
        i = int(np.argmin(q))
        if q[i] < best_min:
            best_min, arg_min = float(q[i]), s + i
        i = int(np.argmax(q))
        if q[i] > best_max:
            best_max, arg_max = float(q[i]), s + i
    return best_min, arg_min, best_max, arg_max


@njit(cache=True, parallel=True)
def _grid_q_offset(k, start, npoints, step):
    out = np.empty(npoints)
    for a in prange(npoints):
        buf = np.empty(1 << k)
        x = (start + a) * step
        out[a] = _phi_point(k, x, buf) / _phi_point(k - 1, x, buf)
    return out


@njit(cache=True, parallel=True)
def _sine_product_integral(L, level, nodes, weights, use_cos):
    npan = 1 << level
    total = 0.0
    for p in prange(npan):
        acc = 0.0
        for t in range(nodes.size):
            prod = 1.0
            for ell in range(L):
                shift = level - ell
                base = p & ((1 << shift) - 1)
                arg = math.pi * (base + nodes[t]) / (1 << shift)
                if use_cos:
                    prod *= abs(2.0 * math.cos(arg))
                else:
                    prod *= abs(2.0 * math.sin(arg))
            acc += weights[t] * prod
        total += acc
    return total / npan


def sine_product_integral(L, level, nodes, weights, use_cos):
    return float(_sine_product_integral(
        int(L), int(level),
        np.ascontiguousarray(nodes, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        bool(use_cos)))


@njit(cache=True)
def _gcd_sum(a):
    J = a.size
    total = 0.0
    for i in range(J):
        j1 = i + 1
        ai = abs(a[i]) / math.sqrt(j1)
        row = 0.0
        for k in range(J):
            j2 = k + 1
            x = j1
            y = j2
            while y:
                x, y = y, x % y
            row += x * abs(a[k]) / math.sqrt(j2)
        total += ai * row
    return 0.5 * total


def gcd_sum(a):
    return float(_gcd_sum(np.ascontiguousarray(a, dtype=np.float64)))
