"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 5] [--json out.json]

Each case is run once untimed (JIT warm-up), then ``repeat`` times; the
best time is reported together with the max abs difference of the outputs.
"""

import argparse
import json
import math
import time

import numpy as np

from tmk import kernels


def _cases():
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2**64, size=1 << 20, dtype=np.uint64)
    n = np.arange(1, (1 << 20) + 1, dtype=np.uint64)
    vals = rng.standard_normal(1 << 20)
    bits = rng.integers(0, 2, size=8192 + 64, dtype=np.uint8)
    x, w = np.polynomial.legendre.leggauss(16)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    return {
        "windows64 (8192)": ("windows64", (bits,)),
        "mul_frac_u64 (2^20)": ("mul_frac_u64", (n, 0x9E3779B97F4A7C15, 0x7F4A7C159E3779B9)),
        "phase_sum (2^20)": ("phase_sum", (u,)),
        "neumaier_cumsum (2^20)": ("neumaier_cumsum", (vals,)),
        "star_disc_sorted (2^20)": ("star_disc_sorted", (np.sort(u),)),
        "q_values k=6 (2^14)": ("q_values", (6, np.linspace(0, 0.5, 1 << 14))),
        "grid_q_extrema k=6 (10^5)": ("grid_q_extrema", (6, 100_001, 0.5 / 100_000)),
        "sine_product_integral L=14": ("sine_product_integral", (14, 13, x, w, False)),
        "gcd_sum J=1024": ("gcd_sum", (1.0 / np.arange(1, 1025),)),
    }


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(np.asarray(o, dtype=np.float64)) for o in out])
    return np.ravel(np.asarray(out, dtype=np.float64))


def _best(fn, args, repeat):
    fn(*args)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    if kernels.numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rows = []
    print(f"{'kernel':32s} {'numpy [s]':>11s} {'numba [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for label, (name, cargs) in _cases().items():
        tn, on = _best(getattr(kernels.numpy_impl, name), cargs, args.repeat)
        tb, ob = _best(getattr(kernels.numba_impl, name), cargs, args.repeat)
        diff = float(np.max(np.abs(_flat(on) - _flat(ob))))
        rows.append({"kernel": label, "numpy": tn, "numba": tb, "speedup": tn / tb, "max_diff": diff})
        print(f"{label:32s} {tn:11.4g} {tb:11.4g} {tn / tb:8.1f} {diff:10.2g}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
