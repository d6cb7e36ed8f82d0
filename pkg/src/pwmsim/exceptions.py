"""Exception types shared across the package."""


class PwmSimError(Exception):
    """Base class for all package errors."""


class NotHermitianError(PwmSimError):
    pass


class NoConvergenceError(PwmSimError):
    pass


class DimensionOverflowError(PwmSimError):
    pass


class DimensionMismatchError(PwmSimError):
    pass


class OutOfRangeError(PwmSimError):
    pass


class NotPeriodicError(PwmSimError):
    pass


class AmplitudeTooSmallError(PwmSimError):
    pass


class GridMismatchError(PwmSimError):
    pass


class NonUniformGridError(PwmSimError):
    pass


class FundamentalMismatchError(PwmSimError):
    pass


class CacheMissError(PwmSimError):
    pass


class NotNormalizedError(PwmSimError):
    pass


class TimingUnstableError(PwmSimError):
    pass


class ConfigError(PwmSimError):
    """Invalid run configuration (unknown keys, bad values, missing files)."""
