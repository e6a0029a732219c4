"""Backend switch for the hot kernels.

``TMK_BACKEND=numpy`` (or ``TMK_DISABLE_NUMBA=1``) forces the pure-numpy
kernels; otherwise numba is used when it imports cleanly.
"""

import os

_requested = os.environ.get("TMK_BACKEND", "").strip().lower()
if os.environ.get("TMK_DISABLE_NUMBA", "") not in ("", "0"):
    _requested = "numpy"

try:
    import numba

    HAVE_NUMBA = True
    # the bundled TBB is too old on some hosts and only produces a warning
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"TMK_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numpy" if (_requested == "numpy" or not HAVE_NUMBA) else "numba"


def set_threads(n):
    """Size numba's worker pool; a no-op under the numpy backend."""
    if n is None or not HAVE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
