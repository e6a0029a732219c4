"""Hot numeric kernels, dispatched to numba or numpy by ``TMK_BACKEND``.

Both implementations stay importable as ``kernels.numpy_impl`` and
``kernels.numba_impl`` (the latter is ``None`` without numba) so that tests
and the benchmark can compare them directly.
"""

from . import _kernels_numpy as numpy_impl
from ._accel import BACKEND, HAVE_NUMBA

if HAVE_NUMBA:
    from . import _kernels_numba as numba_impl
else:  # pragma: no cover
    numba_impl = None

_impl = numba_impl if BACKEND == "numba" else numpy_impl

NAMES = (
    "windows64",
    "mul_frac_u64",
    "phase_sum",
    "neumaier_cumsum",
    "star_disc_sorted",
    "phi_values",
    "q_values",
    "grid_q_extrema",
    "sine_product_integral",
    "gcd_sum",
)

windows64 = _impl.windows64
mul_frac_u64 = _impl.mul_frac_u64
phase_sum = _impl.phase_sum
neumaier_cumsum = _impl.neumaier_cumsum
star_disc_sorted = _impl.star_disc_sorted
phi_values = _impl.phi_values
q_values = _impl.q_values
grid_q_extrema = _impl.grid_q_extrema
sine_product_integral = _impl.sine_product_integral
gcd_sum = _impl.gcd_sum

__all__ = ["BACKEND", "numpy_impl", "numba_impl", *NAMES]
