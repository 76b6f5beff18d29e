"""
Fisher's test for hidden periodicities and distribution checks for
periodogram ordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Optional

import numpy as np
from scipy import stats as sps

from .core import PeriodogramMatrix
from .exceptions import AllZero

__all__ = [
    "FisherResult", "Chi2Diagnostic", "fisher_statistic", "fisher_tail",
    "fisher_test", "fisher_frequencies", "chi2_limit_check",
]


@dataclass
class FisherResult:
    statistic: float
    q: int
    p_value: Optional[float]
    argmax_frequency: float
    reject: Optional[bool] = None

    def as_dict(self):
        return {"statistic": self.statistic, "q": self.q, "p_value": self.p_value,
                "reject": self.reject, "argmax_frequency": self.argmax_frequency}


def fisher_statistic(ordinates, freqs=None) -> FisherResult:
    """Largest ordinate over the sum of all ``q`` ordinates.

    Ties go to the lowest frequency. ``freqs`` labels the ordinates (their
    positions are used when omitted). The p-value is left unset.
    """
    x = np.asarray(ordinates, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least two ordinates")
    if np.any(x < 0) or not np.isfinite(x).all():
        raise ValueError("ordinates must be finite and nonnegative")
    total = x.sum()
    if total <= 0:
        raise AllZero("all ordinates are zero")
    k = int(np.argmax(x))
    label = float(freqs[k]) if freqs is not None else float(k)
    return FisherResult(float(x[k] / total), int(x.size), None, label)


def fisher_tail(x, q) -> float:
    """Exact null probability that Fisher's statistic exceeds ``x``.

    ``sum_{k=1}^{floor(1/x)} (-1)**(k-1) * C(q, k) * (1 - k*x)**(q-1)``.
    Small terms are summed in binary floating point with ``math.fsum``.
    When the largest term exceeds 10 the alternating series cancels badly,
    so it is re-evaluated in decimal arithmetic with enough digits to cover
    the cancellation (raised further if the result is tinier than the
    rounding error).
    """
    q = int(q)
    if q < 2:
        raise ValueError("q must be at least 2")
    x = float(x)
    if x <= 1.0 / q:
        return 1.0
    if x >= 1.0:
        return 0.0
    top = min(int(math.floor(1.0 / x)), q)
    ks = [k for k in range(top, 0, -1) if 1.0 - k * x > 0]
    log_qfact = math.lgamma(q + 1)
    logs = [log_qfact - math.lgamma(k + 1) - math.lgamma(q - k + 1)
            + (q - 1) * math.log(1.0 - k * x) for k in ks]
    biggest = max(logs) / math.log(10)
    if biggest <= 1.0:
        total = math.fsum((-1) ** (k - 1) * math.exp(lg) for k, lg in zip(ks, logs))
    else:
        total = _tail_decimal(Decimal(x), q, ks, biggest)
    return min(1.0, max(0.0, total))


def _tail_decimal(x, q, ks, biggest):
    digits = int(biggest) + 30
    while True:
        with localcontext() as ctx:
            ctx.prec = digits
            total = sum((-1) ** (k - 1) * Decimal(math.comb(q, k)) * (1 - k * x) ** (q - 1)
                        for k in ks)
            # trust the value only if it sits well above the rounding error
            if total == 0 or total.adjusted() > biggest - digits + 20:
                return float(total)
        if digits > 20 * (biggest + 30):
            return float(total)
        digits *= 2


def fisher_frequencies(n, band=None, include_nyquist=False) -> np.ndarray:
    """Column indices (into ``nu = 1..floor(n/2)``) entering Fisher's test.

    By default all interior Fourier frequencies ``0 < f < 1/2``; ``band`` is
    an optional ``(f_low, f_high)`` restriction in cycles per sample.
    """
    nus = np.arange(1, n // 2 + 1)
    keep = np.ones(nus.size, dtype=bool)
    if n % 2 == 0 and not include_nyquist:
        keep[-1] = False
    if band is not None:
        f = nus / n
        keep &= (f >= band[0]) & (f <= band[1])
    return np.flatnonzero(keep)


def fisher_test(pm: PeriodogramMatrix, level_index=0, significance=0.05,
                band=None, include_nyquist=False) -> FisherResult:
    """Apply Fisher's test to one row of a periodogram matrix.

    Rejects when the exact white-noise tail probability falls below
    ``significance``. For expectile or quantile periodograms this null
    distribution is only approximate.
    """
    cols = fisher_frequencies(pm.n, band, include_nyquist)
    row = pm.ordinates[level_index, cols]
    res = fisher_statistic(row, pm.freqs[cols])
    res.p_value = fisher_tail(res.statistic, res.q)
    res.reject = bool(res.p_value < significance)
    return res


@dataclass
class Chi2Diagnostic:
    ks_statistic: float
    ks_pvalue: float
    ks_critical_1pct: float
    mean: float
    var_mean_ratio: float
    replicates: int

    @property
    def passes_ks(self) -> bool:
        return self.ks_statistic < self.ks_critical_1pct


def chi2_limit_check(samples, reference=None) -> Chi2Diagnostic:
    """Compare replicated ordinates at one frequency with the ``(1/2)chi2_2`` law.

    Ordinates are divided by ``reference`` (the spectrum value; the sample
    mean when omitted) and tested against the unit exponential. Also reports
    ``Var/Mean**2`` of the raw ordinates, which tends to 1.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 1000:
        raise ValueError("need at least 1000 replicated ordinates")
    mean = float(x.mean())
    scale = mean if reference is None else float(reference)
    if scale <= 0:
        raise ValueError("reference must be positive")
    ks = sps.kstest(x / scale, "expon")
    return Chi2Diagnostic(
        ks_statistic=float(ks.statistic), ks_pvalue=float(ks.pvalue),
        ks_critical_1pct=float(sps.kstwo.ppf(0.99, x.size)), mean=mean,
        var_mean_ratio=float(x.var(ddof=1) / mean ** 2), replicates=int(x.size))
