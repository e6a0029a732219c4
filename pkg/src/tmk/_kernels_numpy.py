"""Pure-numpy reference kernels.

Every function here has a numba twin in ``_kernels_numba`` with the same
signature and semantics; ``tmk.kernels`` picks one set at import time.
"""

import numpy as np

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_TWO64 = 18446744073709551616.0
_CHUNK = 1 << 16


def windows64(bits):
    """Sliding 64-bit big-endian windows over a 0/1 uint8 array."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    count = bits.size - 63
    if count <= 0:
        return np.zeros(0, dtype=np.uint64)
    view = np.lib.stride_tricks.sliding_window_view(bits, 64)
    packed = np.packbits(view, axis=1)
    return packed.view(">u8").ravel().astype(np.uint64)


def _mulhi(a, b):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    return p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)


def mul_frac_u64(n, a_hi, a_lo):
    """Top 64 bits of frac(n * A / 2**128) for the 128-bit fixed point A."""
    n = np.asarray(n, dtype=np.uint64)
    a_hi = np.uint64(a_hi)
    a_lo = np.full(n.shape, a_lo, dtype=np.uint64)
    return n * a_hi + _mulhi(n, a_lo)


def phase_sum(u):
    """Sum of exp(2 pi i u / 2**64) with pairwise accumulation."""
    theta = np.asarray(u, dtype=np.uint64).astype(np.float64) * (2.0 * np.pi / _TWO64)
    return float(np.sum(np.cos(theta))), float(np.sum(np.sin(theta)))


def neumaier_cumsum(values):
    """Running compensated sums; returns (partials, sum of |values|).

    ``partials[j]`` is the sum of the first ``j`` values.
    """
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(values.size + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i, v in enumerate(values.tolist()):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
    return out, float(np.abs(values).sum())


def star_disc_sorted(u):
    """Star discrepancy of sorted 64-bit fixed-point values."""
    x = np.asarray(u, dtype=np.uint64).astype(np.float64) / _TWO64
    n = x.size
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max((i / n - x).max(), (x - (i - 1) / n).max()))


def phi_values(j, alpha):
    """phi_j at each alpha by bottom-up evaluation of the 2^j argument tree."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    out = np.empty_like(alpha)
    width = max(1, _CHUNK >> j)
    for s in range(0, alpha.size, width):
        a = alpha[s:s + width]
        buf = np.ones((1 << j, a.size))
        size = 1 << j
        for i in range(j, 0, -1):
            half = size >> 1
            y = (a[None, :] + np.arange(half, dtype=np.float64)[:, None]) / float(1 << (i - 1))
            sn = np.abs(np.sin(0.5 * np.pi * y))
            cs = np.abs(np.cos(0.5 * np.pi * y))
            buf[:half] = 0.5 * (sn * buf[:half] + cs * buf[half:size])
            size = half
        out[s:s + width] = buf[0]
    return out


def q_values(k, alpha):
    return phi_values(k, alpha) / phi_values(k - 1, alpha)


def grid_q_extrema(k, npoints, step):
    """min/max of q_k over alpha = a*step, a = 0..npoints-1; returns (min, argmin, max, argmax)."""
    best_min, arg_min = np.inf, -1
    best_max, arg_max = -np.inf, -1
    for s in range(0, npoints, _CHUNK):
        a = np.arange(s, min(npoints, s + _CHUNK), dtype=np.float64) * step
        q = q_values(k, a)
        if not np.all(np.isfinite(q)):
            raise FloatingPointError("non-finite q_k value on grid")
        i = int(np.argmin(q))
        if q[i] < best_min:
            best_min, arg_min = float(q[i]), s + i
        i = int(np.argmax(q))
        if q[i] > best_max:
            best_max, arg_max = float(q[i]), s + i
    return best_min, arg_min, best_max, arg_max


def sine_product_integral(L, level, nodes, weights, use_cos):
    """Integral over [0,1] of prod_{l<L} |2 sin(pi 2^l a)| (or |2 cos|) on dyadic panels.

    ``nodes``/``weights`` are a rule on [0,1]; panels have width 2^-level
    with level >= L - 1 so every factor keeps one sign inside a panel.
    """
    npan = 1 << level
    nodes = np.asarray(nodes, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    width = max(1, _CHUNK // nodes.size)
    total = 0.0
    for s in range(0, npan, width):
        p = np.arange(s, min(npan, s + width), dtype=np.int64)
        prod = np.ones((p.size, nodes.size))
        for ell in range(L):
            shift = level - ell
            base = (p & ((1 << shift) - 1)).astype(np.float64)
            arg = np.pi * (base[:, None] + nodes[None, :]) / float(1 << shift)
            if use_cos:
                prod *= np.abs(2.0 * np.cos(arg))
            else:
                prod *= np.abs(2.0 * np.sin(arg))
        total += float((prod @ weights).sum())
    return total / npan


def gcd_sum(a):
    """sum_{j1,j2} |a_j1 a_j2| / 2 * gcd(j1,j2) / sqrt(j1 j2) over 1-based indices."""
    a = np.abs(np.asarray(a, dtype=np.float64))
    J = a.size
    j = np.arange(1, J + 1, dtype=np.int64)
    rs = 1.0 / np.sqrt(j.astype(np.float64))
    total = 0.0
    rows = max(1, _CHUNK * 4 // max(J, 1))
    for s in range(0, J, rows):
        jj = j[s:s + rows]
        g = np.gcd.outer(jj, j).astype(np.float64)
        block = (a[s:s + rows] * rs[s:s + rows])[:, None] * g * (a * rs)[None, :]
        total += float(block.sum(axis=1).sum())
    return 0.5 * total
