"""
Ensemble experiments built on :func:`expgram.sim.monte_carlo`.

Each function returns plain arrays or small dataclasses so that tests, the
CLI and the demo scripts can share them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .classical import ordinary_periodogram, quantile_ordinates, quantile_periodogram
from .core import DEFAULT_LEVELS, expectile_ordinates, expectile_periodogram, normalize
from .sim import TWO_PI, Ar2, HiddenPeriodicity, McConfig, monte_carlo
from .spectrum import (_smooth_rows, default_half_width, level_variance,
                       modified_daniell, roughness)
from .stats import fisher_frequencies, fisher_statistic, fisher_tail

__all__ = [
    "TABLE1_MODEL", "DetectionTable", "detection_table", "null_rejection_rates",
    "ensemble_means", "local_maxima", "signature_check", "low_frequency_mass",
    "consistency_trend", "smoothness_comparison", "level_asymmetry",
]

SIGNIFICANCES = (0.01, 0.05, 0.10)

#: Hidden-periodicity setup used for the detection-rate table: a single
#: modulating cosine at f = 0.1 on an AR(2) carrier peaking at f = 0.3.
TABLE1_MODEL = HiddenPeriodicity(b2=0.0, carrier=Ar2(r=0.6, omega_c=TWO_PI * 0.3))


def _pvalue(row, cols):
    res = fisher_statistic(row[cols])
    return fisher_tail(res.statistic, res.q)


@dataclass
class DetectionTable:
    """Fisher rejection rates: ``rates[i, j]`` is method ``labels[i]`` at
    significance ``significances[j]``."""
    labels: List[Tuple[str, float]]
    significances: Tuple[float, ...]
    rates: np.ndarray
    replicates: int

    @property
    def standard_errors(self):
        return np.sqrt(self.rates * (1 - self.rates) / self.replicates)

    def rate(self, method, level, significance):
        i = self.labels.index((method, level))
        j = list(self.significances).index(significance)
        return float(self.rates[i, j])

    def as_records(self):
        se = self.standard_errors
        return [{"method": m, "level": lv, "significance": s,
                 "rate": float(self.rates[i, j]), "se": float(se[i, j])}
                for i, (m, lv) in enumerate(self.labels)
                for j, s in enumerate(self.significances)]


def detection_table(replicates, seed, model=TABLE1_MODEL, n=200,
                    ep_levels=(0.85, 0.9, 0.95), qp_levels=(0.85, 0.9, 0.95),
                    significances=SIGNIFICANCES, workers=1) -> DetectionTable:
    """Fisher detection rates of EP, QP and PG rows on a simulated ensemble.

    The test runs over interior Fourier frequencies. Pass ``qp_levels=()``
    to skip the (slow) quantile periodogram.
    """
    cols = fisher_frequencies(n)
    ep_levels, qp_levels = tuple(ep_levels), tuple(qp_levels)

    def pipeline(y):
        rows = []
        if ep_levels:
            rows.extend(expectile_ordinates(y, ep_levels)[0])
        if qp_levels:
            rows.extend(quantile_ordinates(y, qp_levels)[0])
        rows.append(ordinary_periodogram(y).ordinates[0])
        return np.array([_pvalue(r, cols) for r in rows])

    mc = monte_carlo(model, McConfig(replicates, n, seed), pipeline, workers)
    p = mc.values["value"]
    rates = np.stack([(p < s).mean(axis=0) for s in significances], axis=1)
    labels = ([("ep", lv) for lv in ep_levels] + [("qp", lv) for lv in qp_levels]
              + [("pg", 0.5)])
    return DetectionTable(labels, tuple(significances), rates, replicates)


def null_rejection_rates(replicates, seed, n=200, significances=SIGNIFICANCES):
    """PG Fisher rejection rates under Gaussian white noise, with binomial SEs."""
    cols = fisher_frequencies(n)
    mc = monte_carlo(Ar2(r=0.0), McConfig(replicates, n, seed),
                     lambda y: _pvalue(ordinary_periodogram(y).ordinates[0], cols))
    p = mc.values["value"]
    rates = np.array([(p < s).mean() for s in significances])
    se = np.sqrt(np.asarray(significances) * (1 - np.asarray(significances)) / replicates)
    return rates, se


def ensemble_means(model, n, replicates, seed, levels=(0.9,), workers=1):
    """Ensemble-mean EP rows at ``levels`` and the ensemble-mean PG row."""
    levels = tuple(levels)

    def pipeline(y):
        return {"ep": expectile_ordinates(y, levels)[0],
                "pg": ordinary_periodogram(y).ordinates[0]}

    mc = monte_carlo(model, McConfig(replicates, n, seed), pipeline, workers)
    return mc.mean("ep"), mc.mean("pg")


def local_maxima(values) -> np.ndarray:
    """Positions strictly above both neighbours (end points excluded)."""
    v = np.asarray(values, dtype=float)
    return np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1


@dataclass
class SignatureReport:
    ep_maxima: np.ndarray
    pg_peak_ratio: float
    targets_found: Dict[float, bool] = field(default_factory=dict)

    @property
    def passes(self):
        return all(self.targets_found.values()) and self.pg_peak_ratio <= 1.2


def signature_check(ep_row, pg_row, n, targets=(0.1, 0.12), band=(0.08, 0.14)):
    """Look for EP local maxima within one grid step of each target frequency
    and measure the tallest PG local maximum in ``band`` against the PG's
    median there (0 when there is none)."""
    f = np.arange(1, n // 2 + 1) / n
    ep_max = f[local_maxima(ep_row)]
    found = {t: bool(np.any(np.abs(ep_max - t) <= 1.0 / n + 1e-12)) for t in targets}
    inband = (f >= band[0] - 1e-12) & (f <= band[1] + 1e-12)
    med = np.median(pg_row[inband])
    peaks = [k for k in local_maxima(pg_row) if inband[k]]
    ratio = max((pg_row[k] / med for k in peaks), default=0.0)
    return SignatureReport(ep_max, float(ratio), found)


def low_frequency_mass(row, fraction=0.1) -> float:
    """Share of a row's total in its lowest ``ceil(fraction * K)`` ordinates."""
    row = np.asarray(row, dtype=float)
    k = int(np.ceil(fraction * row.size))
    return float(row[:k].sum() / row.sum())


def _smoothed_ep(y, alpha):
    n = y.size
    row = expectile_ordinates(y, [alpha])[0]
    return _smooth_rows(row, modified_daniell(default_half_width(n)))[0]


def consistency_trend(model, alpha, ns, ref_n, replicates, ref_replicates, seed,
                      workers=1):
    """Median MSE and KL divergence of smoothed EP rows against a large-sample
    reference.

    The reference is the ensemble mean of smoothed EPs at length ``ref_n``;
    each ``n`` in ``ns`` must divide ``ref_n`` so that its Fourier grid is a
    subset of the reference grid. MSE compares raw smoothed ordinates; KL
    compares rows rescaled to unit sum on the common grid.
    """
    ref = monte_carlo(model, McConfig(ref_replicates, ref_n, seed),
                      lambda y: _smoothed_ep(y, alpha), workers).mean()
    out = {"n": [], "mse": [], "kl": []}
    for j, n in enumerate(ns):
        if ref_n % n:
            raise ValueError(f"n={n} does not divide the reference length {ref_n}")
        step = ref_n // n
        target = ref[step - 1::step]
        q = target / target.sum()

        def pipeline(y, target=target, q=q):
            g = _smoothed_ep(y, alpha)
            p = g / g.sum()
            return {"mse": np.mean((g - target) ** 2),
                    "kl": np.sum(np.where(p > 0, p * np.log(np.where(p > 0, p, 1) / q), 0.0))}

        mc = monte_carlo(model, McConfig(replicates, n, seed + 1 + j), pipeline, workers)
        out["n"].append(n)
        out["mse"].append(float(np.median(mc.values["mse"])))
        out["kl"].append(float(np.median(mc.values["kl"])))
    return {k: np.asarray(v) for k, v in out.items()}


def smoothness_comparison(model, n, replicates, seed, omegas=(TWO_PI * 0.1,),
                          levels=DEFAULT_LEVELS, workers=1):
    """Across-level variance (of unit-sum rows) and roughness (of raw
    ordinates) of EP and QP at each of ``omegas``.

    Returns a dict of ``(replicates, len(omegas))`` arrays keyed ``ep_var``,
    ``qp_var``, ``ep_rough`` and ``qp_rough``.
    """
    omegas = tuple(omegas)

    def pipeline(y):
        ep = expectile_periodogram(y, levels)
        qp = quantile_periodogram(y, levels)
        ep_n, qp_n = normalize(ep), normalize(qp)
        return {"ep_var": [level_variance(ep_n, w) for w in omegas],
                "qp_var": [level_variance(qp_n, w) for w in omegas],
                "ep_rough": [roughness(ep, w) for w in omegas],
                "qp_rough": [roughness(qp, w) for w in omegas]}

    mc = monte_carlo(model, McConfig(replicates, n, seed), pipeline, workers)
    return mc.values


def level_asymmetry(model, n, replicates, seed, low=0.1, high=0.9, workers=1):
    """L1 distance between unit-sum smoothed ensemble-mean EP rows at two
    levels."""
    mean_ep, _ = ensemble_means(model, n, replicates, seed, (low, high), workers)
    sm = _smooth_rows(mean_ep, modified_daniell(default_half_width(n)))
    sm = sm / sm.sum(axis=1, keepdims=True)
    return float(np.abs(sm[0] - sm[1]).sum())
