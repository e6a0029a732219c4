"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class TMKError(Exception):
    exit_code = 5


class ConfigError(TMKError, ValueError):
    """Bad alpha spec, unknown rule name, out-of-range parameter."""

    exit_code = 2


class SizeError(ConfigError):
    exit_code = 2


class PrecisionError(TMKError):
    """Not enough certified bits to answer the request."""

    exit_code = 3


class SingularityError(PrecisionError):
    """A lacunary argument fell within 2^-(P-2) of a zero of sin/cos."""

    exit_code = 3

    def __init__(self, message, index=None, distance=None):
        super().__init__(message)
        self.index = index
        self.distance = distance


class ToleranceError(TMKError):
    """Quadrature or iteration failed to meet its tolerance."""

    exit_code = 4


class DataError(TMKError, ValueError):
    """Input data violates a structural expectation (e.g. unknown 8-block quadruple)."""

    exit_code = 5
