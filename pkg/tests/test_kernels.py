import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmk import kernels

pytestmark = pytest.mark.skipif(kernels.numba_impl is None, reason="numba not importable")

_X, _W = np.polynomial.legendre.leggauss(16)
_X, _W = 0.5 * (_X + 1), 0.5 * _W


def _cases():
    rng = np.random.default_rng(3)
    u = rng.integers(0, 2**64, size=5000, dtype=np.uint64)
    return {
        "windows64": (rng.integers(0, 2, size=300, dtype=np.uint8),),
        "mul_frac_u64": (np.arange(1, 5001, dtype=np.uint64), 0x9E3779B97F4A7C15, 0x7F4A7C159E3779B9),
        "phase_sum": (u,),
        "neumaier_cumsum": (rng.standard_normal(5000),),
        "star_disc_sorted": (np.sort(u),),
        "phi_values": (7, np.linspace(0, 1, 513)),
        "q_values": (6, np.linspace(0, 0.5, 513)),
        "grid_q_extrema": (5, 2001, 0.5 / 2000),
        "sine_product_integral": (8, 9, _X, _W, True),
        "gcd_sum": (1.0 / np.arange(1, 200),),
    }


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(np.asarray(o, dtype=np.float64)) for o in out])
    return np.ravel(np.asarray(out, dtype=np.float64))


def test_cases_cover_every_kernel():
    assert set(_cases()) == set(kernels.NAMES)


@pytest.mark.parametrize("name", kernels.NAMES)
def test_backends_agree(name):
    args = _cases()[name]
    a = getattr(kernels.numpy_impl, name)(*args)
    b = getattr(kernels.numba_impl, name)(*args)
    if name in ("windows64", "mul_frac_u64"):
        assert np.array_equal(a, b)
    else:
        assert np.allclose(_flat(a), _flat(b), rtol=1e-12, atol=1e-9)


@given(st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=50))
def test_star_disc_sorted_agree(xs):
    u = np.sort(np.array(xs, dtype=np.uint64))
    assert kernels.numpy_impl.star_disc_sorted(u) == pytest.approx(
        kernels.numba_impl.star_disc_sorted(u), abs=1e-15)


@pytest.mark.parametrize("env,expected", [({"TMK_BACKEND": "numpy"}, "numpy"),
                                          ({"TMK_DISABLE_NUMBA": "1"}, "numpy"),
                                          ({"TMK_BACKEND": "numba"}, "numba")])
def test_backend_flag(env, expected):
    full = {k: v for k, v in os.environ.items() if k not in ("TMK_BACKEND", "TMK_DISABLE_NUMBA")}
    full.update(env)
    out = subprocess.run([sys.executable, "-c", "from tmk import kernels; print(kernels.BACKEND)"],
                         env=full, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def test_bad_backend_flag():
    env = dict(os.environ, TMK_BACKEND="fortran")
    r = subprocess.run([sys.executable, "-c", "import tmk.kernels"], env=env, capture_output=True)
    assert r.returncode != 0
