"""Numerics for the Thue-Morse-Kronecker sequence {n_k alpha} over evil numbers n_k."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .errors import (ConfigError, DataError, PrecisionError, SingularityError, SizeError,
                     TMKError, ToleranceError)

__all__ = ["__version__", "TMKError", "ConfigError", "SizeError", "PrecisionError",
           "SingularityError", "ToleranceError", "DataError"]
