"""Exception types raised by expgram."""


class ExpgramError(Exception):
    """Base class for all package errors."""


class InvalidSeries(ExpgramError, ValueError):
    """Input series is too short or contains non-finite values."""


class InvalidLevel(ExpgramError, ValueError):
    """An expectile or quantile level lies outside the open unit interval."""


class DegenerateDesign(ExpgramError, ValueError):
    """Fewer observations than regressors."""


class ZeroRow(ExpgramError, ValueError):
    """A periodogram row sums to zero and cannot be normalized."""


class KernelTooWide(ExpgramError, ValueError):
    """Smoothing kernel half-width is too large for the row length."""


class GridMismatch(ExpgramError, ValueError):
    """Two objects live on different frequency or level grids."""


class SupportMismatch(ExpgramError, ValueError):
    """KL divergence undefined: reference is zero where target is positive."""


class AllZero(ExpgramError, ValueError):
    """All ordinates handed to Fisher's test are zero."""


class NonStationary(ExpgramError, ValueError):
    """Model parameters violate the stationarity condition."""


class ReplicateError(ExpgramError, RuntimeError):
    """A Monte Carlo replicate failed; carries the replicate index."""

    def __init__(self, index, cause):
        super().__init__(f"replicate {index} failed: {cause!r}")
        self.index = index
        self.cause = cause
