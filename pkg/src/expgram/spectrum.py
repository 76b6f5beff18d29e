"""
Expectile spectrum quantities, periodogram smoothing and comparison metrics.

The expectile spectrum at level ``alpha`` is ``eta(alpha)**2 * h(omega, alpha)``
where ``h`` is the ordinary spectrum (cosine transform of the autocovariance)
of the expectile crossing process ``expectile_loss_derivative(y_t - mu)``
and ``eta`` depends only on the marginal distribution. Smoothing raw
expectile periodogram ordinates across neighbouring Fourier frequencies
estimates it consistently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import asecp
from .core import FrequencyGrid, PeriodogramMatrix, as_series, check_levels
from .exceptions import (GridMismatch, KernelTooWide, SupportMismatch,
                         ZeroRow)

__all__ = [
    "SmoothingKernel", "SpectrumEstimate", "daniell", "modified_daniell",
    "default_half_width", "scaling_factor_eta", "ascep_acf", "h_spectrum",
    "expectile_spectrum", "smooth", "smooth_matrix", "mse", "kl_divergence",
    "level_variance", "roughness",
]


@dataclass(frozen=True)
class SmoothingKernel:
    """Nonnegative weights ``W_s``, ``s = -M..M``, summing to one."""
    weights: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size % 2 == 0:
            raise ValueError("kernel needs an odd number of weights (s = -M..M)")
        if np.any(w < 0) or not np.isfinite(w).all():
            raise ValueError("kernel weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1) > 1e-12:
            w = w / total
        object.__setattr__(self, "weights", w)

    @property
    def half_width(self) -> int:
        return self.weights.size // 2

    @property
    def sum_of_squares(self) -> float:
        return float(np.sum(self.weights ** 2))


def daniell(M) -> SmoothingKernel:
    """Uniform weights ``1/(2M+1)``."""
    M = int(M)
    if M < 0:
        raise ValueError("half-width must be nonnegative")
    return SmoothingKernel(np.full(2 * M + 1, 1.0 / (2 * M + 1)), "daniell")


def modified_daniell(M) -> SmoothingKernel:
    """Uniform weights with half-weight endpoints; ``M = 0`` is the identity."""
    M = int(M)
    if M < 0:
        raise ValueError("half-width must be nonnegative")
    if M == 0:
        return SmoothingKernel(np.ones(1), "modified_daniell")
    w = np.full(2 * M + 1, 1.0 / (2 * M))
    w[0] = w[-1] = 1.0 / (4 * M)
    return SmoothingKernel(w, "modified_daniell")


def default_half_width(n) -> int:
    return max(1, int(round(np.sqrt(n) / 2)))


@dataclass
class SpectrumEstimate:
    """Smoothed ordinates at one level on the Fourier grid of length ``n``."""
    n: int
    level: float
    values: np.ndarray
    kernel: SmoothingKernel
    normalized: bool = False

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.n)

    @property
    def freqs(self):
        return self.grid.freqs

    def normalize(self) -> "SpectrumEstimate":
        total = self.values.sum()
        if total <= 0:
            raise ZeroRow("spectrum estimate sums to zero")
        return SpectrumEstimate(self.n, self.level, self.values / total,
                                self.kernel, True)


# ---------------------------------------------------------------------------
# Theoretical quantities
# ---------------------------------------------------------------------------

def scaling_factor_eta(alpha, F_at_mu):
    """``0.5 / (alpha*(1 - F) + (1 - alpha)*F)`` with ``F`` the marginal CDF
    evaluated at the ``alpha``-expectile."""
    alpha = check_levels(alpha)
    F = np.asarray(F_at_mu, dtype=float)
    if np.any((F <= 0) | (F >= 1)):
        raise ValueError("F_at_mu must lie in (0, 1)")
    out = 0.5 / (alpha * (1 - F) + (1 - alpha) * F)
    return float(out[0]) if out.size == 1 else out


def ascep_acf(y, alpha, max_lag) -> np.ndarray:
    """Biased (divide-by-n) sample autocovariances of the expectile crossing
    process at lags ``0..max_lag``."""
    y = as_series(y, min_length=1)
    max_lag = int(max_lag)
    if not 0 <= max_lag < y.size:
        raise ValueError("need 0 <= max_lag < n")
    x = asecp(y, alpha)
    x = x - x.mean()
    n = x.size
    return np.array([np.dot(x[:n - k], x[k:]) / n for k in range(max_lag + 1)])


def h_spectrum(acf, omegas) -> np.ndarray:
    """Truncated cosine transform ``acf[0] + 2*sum_k acf[k]*cos(omega*k)``.

    Raw truncated sums can dip below zero; no clipping is done here.
    """
    acf = np.asarray(acf, dtype=float)
    if not np.isfinite(acf).all():
        raise ValueError("acf must be finite")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    lags = np.arange(1, acf.size)
    return acf[0] + 2 * np.cos(np.outer(omegas, lags)) @ acf[1:]


def expectile_spectrum(y, alpha, omegas=None, max_lag=None) -> np.ndarray:
    """Plug-in expectile spectrum ``eta**2 * h`` from one sample.

    ``eta`` uses the empirical CDF at the sample expectile. Autocovariances
    are tapered with Bartlett weights ``1 - k/(max_lag+1)`` (default
    ``max_lag = 2*sqrt(n)``), which keeps the estimate nonnegative.
    """
    from .core import scalar_expectile
    y = as_series(y)
    n = y.size
    if omegas is None:
        omegas = FrequencyGrid(n).omegas
    if max_lag is None:
        max_lag = int(min(n - 1, 2 * np.sqrt(n)))
    mu = scalar_expectile(y, alpha)
    F = np.clip(np.mean(y <= mu), 1.0 / n, 1 - 1.0 / n)
    eta = scaling_factor_eta(alpha, F)
    acf = ascep_acf(y, alpha, max_lag)
    acf = acf * (1 - np.arange(acf.size) / (max_lag + 1))
    return eta ** 2 * h_spectrum(acf, omegas)


# ---------------------------------------------------------------------------
# Smoothing
# ---------------------------------------------------------------------------

def _as_kernel(kernel, n):
    if kernel is None:
        kernel = modified_daniell(default_half_width(n))
    elif isinstance(kernel, (int, np.integer)):
        kernel = modified_daniell(kernel)
    return kernel


def _smooth_rows(rows, kernel):
    rows = np.atleast_2d(rows)
    M = kernel.half_width
    K = rows.shape[-1]
    if M == 0:
        return rows.copy()
    if not M < K / 2:
        raise KernelTooWide(f"half-width {M} needs more than {2 * M} ordinates, got {K}")
    padded = np.pad(rows, ((0, 0), (M, M)), mode="reflect")
    out = np.zeros(rows.shape)
    for s, w in enumerate(kernel.weights):
        out += w * padded[:, s:s + K]
    return out


def smooth(row, kernel=None, n=None, level=np.nan) -> SpectrumEstimate:
    """Kernel-smooth one row of periodogram ordinates across frequency.

    ``g[nu] = sum_s W_s * row[nu + s]``; ordinates beyond either end of the
    grid are mirrored about the first and last frequency (the end ordinates
    themselves are not repeated).

    Parameters
    ----------
    row : array_like
        Ordinates at ``nu = 1..floor(n/2)``.
    kernel : SmoothingKernel or int, optional
        An int is taken as the half-width of a modified Daniell kernel; by
        default ``M = round(sqrt(n)/2)``.
    n : int, optional
        Series length; inferred as ``2*len(row)`` when omitted.
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise ValueError("smooth expects a single row")
    n = 2 * row.size if n is None else int(n)
    kernel = _as_kernel(kernel, n)
    values = _smooth_rows(row, kernel)[0]
    return SpectrumEstimate(n, float(level), values, kernel)


def smooth_matrix(pm: PeriodogramMatrix, kernel=None) -> PeriodogramMatrix:
    """Smooth every row of a periodogram matrix (the normalized flag is kept
    because the smoother preserves row sums only approximately; renormalize
    if exact unit sums are needed)."""
    kernel = _as_kernel(kernel, pm.n)
    return PeriodogramMatrix(pm.n, pm.levels, _smooth_rows(pm.ordinates, kernel),
                             normalized=False, kind=pm.kind,
                             converged=pm.converged.copy())


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _values(x):
    if isinstance(x, SpectrumEstimate):
        return x.values, x.n
    return np.asarray(x, dtype=float), None


def mse(a, b) -> float:
    """Mean squared difference of two spectrum estimates on the same grid."""
    va, na = _values(a)
    vb, nb = _values(b)
    if va.shape != vb.shape or (na is not None and nb is not None and na != nb):
        raise GridMismatch(f"grids differ: {va.shape} vs {vb.shape}")
    return float(np.mean((va - vb) ** 2))


def kl_divergence(p, q) -> float:
    """``sum p*log(p/q)`` with ``0*log(0/q) = 0``."""
    vp, np_ = _values(p)
    vq, nq = _values(q)
    if vp.shape != vq.shape or (np_ is not None and nq is not None and np_ != nq):
        raise GridMismatch(f"grids differ: {vp.shape} vs {vq.shape}")
    support = vp > 0
    if np.any(vq[support] <= 0):
        raise SupportMismatch("q vanishes where p is positive")
    return float(np.sum(vp[support] * np.log(vp[support] / vq[support])))


def _column(pm, omega, min_levels):
    if pm.levels.size < min_levels:
        raise ValueError(f"need at least {min_levels} levels")
    nu = omega * pm.n / (2 * np.pi)
    if abs(nu - round(nu)) > 1e-6:
        raise GridMismatch(f"omega={omega} is not a Fourier frequency for n={pm.n}")
    try:
        return pm.column(omega)
    except ValueError as err:
        raise GridMismatch(str(err)) from None


def level_variance(pm: PeriodogramMatrix, omega) -> float:
    """Sample variance (ddof=1) across levels of the ordinates at ``omega``."""
    return float(np.var(_column(pm, omega, 2), ddof=1))


def roughness(pm: PeriodogramMatrix, omega) -> float:
    """Sum of squared second differences across levels at ``omega``."""
    return float(np.sum(np.diff(_column(pm, omega, 3), n=2) ** 2))
