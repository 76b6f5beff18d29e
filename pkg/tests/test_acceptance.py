"""
Acceptance criteria 1-10.

Each test appends a ``CRITERION k PASS|FAIL`` line (echoed in the pytest
terminal summary) before asserting. Seeds are fixed in advance at
``20261015 + k``. Replicate counts follow the desk-scale defaults unless
``EXPGRAM_FULL=1`` is set; see README.md for the per-criterion scale.
"""
import itertools

import numpy as np
import pytest

from expgram import expectile_periodogram, ordinary_periodogram, trig_expectile_fit
from expgram.classical import quantile_fit
from expgram.core import expectile_ordinates
from expgram.experiments import (consistency_trend, detection_table, ensemble_means,
                                 low_frequency_mass, null_rejection_rates, signature_check)
from expgram.sim import TWO_PI, Ar2, Garch11, HiddenPeriodicity, McConfig, monte_carlo
from expgram.stats import chi2_limit_check, fisher_tail

from conftest import ACCEPTANCE_LINES, FULL
from oracles import (expectile_objective, expectile_oracle, quantile_objective,
                     quantile_oracle, trig_design)

SEED = 20261015


def record(k, ok, detail):
    line = f"CRITERION {k} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_ep_half_equals_pg():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for i in range(100):
        n = (64, 200, 1024)[i % 3]
        y = [rng.standard_normal(n), rng.standard_t(3, n), rng.exponential(size=n)][i % 3 - 1 if i % 2 else 0]
        ep = expectile_periodogram(y, [0.5]).ordinates[0]
        pg = ordinary_periodogram(y).ordinates[0]
        worst = max(worst, float(np.max(np.abs(ep - pg) / pg)))
    assert record(1, worst <= 1e-8, f"max relative cell difference {worst:.2e} (limit 1e-8)")


def test_criterion_02_oracle_equivalence():
    rng = np.random.default_rng(SEED + 2)
    irls_coef = irls_obj = qp_coef = qp_obj = 0.0
    unique_count = 0
    for _ in range(50):
        n = int(rng.integers(8, 65))
        nu = int(rng.integers(1, n // 2 + 1))
        y = rng.standard_normal(n) * rng.uniform(0.5, 5) + rng.uniform(-3, 3)
        X = trig_design(n, nu)
        omega = 2 * np.pi * nu / n
        alpha = float(rng.uniform(0.05, 0.95))
        fit = trig_expectile_fit(y, omega, alpha)
        beta, obj = expectile_oracle(y, X, alpha)
        irls_coef = max(irls_coef, float(np.max(np.abs(fit.beta - beta))))
        irls_obj = max(irls_obj, abs(expectile_objective(y, X, alpha, fit.beta) - obj) / obj)

        theta = float(rng.uniform(0.05, 0.95))
        qfit = quantile_fit(y, omega, theta)
        qbeta, qobj, unique = quantile_oracle(y, X, theta)
        qp_obj = max(qp_obj, abs(quantile_objective(y, X, theta, qfit.beta) - qobj) / qobj)
        if unique:
            unique_count += 1
            qp_coef = max(qp_coef, float(np.max(np.abs(qfit.beta - qbeta))))
    ok = irls_coef <= 1e-6 and irls_obj <= 1e-8 and qp_coef <= 1e-6 and qp_obj <= 1e-8
    assert record(2, ok, f"IRLS coef {irls_coef:.1e} obj {irls_obj:.1e}; QP coef {qp_coef:.1e} "
                         f"({unique_count}/50 unique optima) obj {qp_obj:.1e}")


def _simulated_tail(q, x, draws, rng, chunk=50_000):
    hits = 0
    for start in range(0, draws, chunk):
        e = rng.exponential(size=(min(chunk, draws - start), q))
        hits += int(np.count_nonzero(e.max(axis=1) > x * e.sum(axis=1)))
    p = hits / draws
    return p, np.sqrt(p * (1 - p) / draws)


def test_criterion_03_fisher_tail_exactness():
    rng = np.random.default_rng(SEED + 3)
    parts, ok = [], True
    for q, x in [(2, 0.6), (3, 0.4), (10, 0.2), (50, 0.06)]:
        p, se = _simulated_tail(q, x, 1_000_000, rng)
        z = abs(fisher_tail(x, q) - p) / se
        ok &= z <= 3
        parts.append(f"q={q} x={x}: exact {fisher_tail(x, q):.5f} sim {p:.5f} ({z:.2f} SE)")
    assert record(3, ok, "; ".join(parts))


def test_criterion_04_table1_detection_rates():
    reps, tol = (5000, 0.02) if FULL else (1000, 0.04)
    table = detection_table(reps, SEED + 4, qp_levels=())
    ep85, ep90 = table.rate("ep", 0.85, 0.05), table.rate("ep", 0.9, 0.05)
    pg = table.rate("pg", 0.5, 0.05)
    ok = abs(ep90 - 0.8426) <= tol and abs(pg - 0.2978) <= tol and ep85 < ep90
    assert record(4, ok, f"{reps} replicates: EP(0.9) {ep90:.4f} vs 0.8426, PG {pg:.4f} vs 0.2978 "
                         f"(tolerance {tol}); EP(0.85) {ep85:.4f} < EP(0.9): {ep85 < ep90}")


def test_criterion_05_chi_square_limit():
    reps, n, nus = 5000, 1024, [100, 256, 400]
    mc = monte_carlo(Ar2(r=0.0), McConfig(reps, n, SEED + 5),
                     lambda y: expectile_ordinates(y, [0.5, 0.8], nus=nus)[0])
    vals = mc.values["value"]  # (reps, levels, freqs)
    ok, parts, worst_r = True, [], 0.0
    for li, alpha in enumerate((0.5, 0.8)):
        for fi, nu in enumerate(nus):
            d = chi2_limit_check(vals[:, li, fi])
            good = d.passes_ks and 0.85 <= d.var_mean_ratio <= 1.15
            ok &= good
            parts.append(f"a={alpha} nu={nu} KS {d.ks_statistic:.4f}/{d.ks_critical_1pct:.4f} "
                         f"V/M2 {d.var_mean_ratio:.3f}")
        r = np.corrcoef(vals[:, li, :].T)
        worst_r = max(worst_r, float(np.max(np.abs(r[np.triu_indices(len(nus), 1)]))))
    ok &= worst_r < 0.05
    assert record(5, ok, "; ".join(parts) + f"; max |r| {worst_r:.4f}")


@pytest.mark.slow
def test_criterion_06_consistency_trend():
    reps, ref_reps = 500, (1000 if FULL else 200)
    res = consistency_trend(Ar2(), 0.9, (200, 400, 800, 1600), 3200, reps, ref_reps, SEED + 6)
    ok = bool(np.all(np.diff(res["mse"]) < 0) and np.all(np.diff(res["kl"]) < 0))
    fmt = lambda a: ", ".join(f"{v:.4g}" for v in a)  # noqa: E731
    assert record(6, ok, f"{reps} replicates per n, reference {ref_reps} at n=3200; "
                         f"median MSE [{fmt(res['mse'])}], median KL [{fmt(res['kl'])}]")


def test_criterion_07_hidden_signature():
    ep, pg = ensemble_means(HiddenPeriodicity(), 200, 500, SEED + 7)
    rep = signature_check(ep[0], pg, 200)
    assert record(7, rep.passes, f"EP maxima near 0.1/0.12: {rep.targets_found}; "
                                 f"PG peak/median in band {rep.pg_peak_ratio:.3f} (limit 1.2)")


@pytest.mark.slow
def test_criterion_08_garch_low_frequency():
    ep, pg = ensemble_means(Garch11(), 1024, 500, SEED + 8)
    m_ep, m_pg = low_frequency_mass(ep[0]), low_frequency_mass(pg)
    ratio = m_ep / m_pg
    assert record(8, ratio >= 1.5, f"low-frequency mass EP {m_ep:.4f}, PG {m_pg:.4f}, "
                                   f"ratio {ratio:.2f} (need >= 1.5)")


@pytest.mark.slow
def test_criterion_09_smoothness_ordering(smoothness_ar2):
    s = smoothness_ar2
    ep_v, qp_v = s["ep_var"][:, 0].mean(), s["qp_var"][:, 0].mean()
    ep_r, qp_r = s["ep_rough"][:, 0].mean(), s["qp_rough"][:, 0].mean()
    ratio = ep_v / qp_v
    ok = ep_v < qp_v and ep_r < qp_r and 0.2 <= ratio <= 0.7
    assert record(9, ok, f"{s['ep_var'].shape[0]} replicates: variance EP {ep_v:.3e} QP {qp_v:.3e} "
                         f"(ratio {ratio:.3f}), roughness EP {ep_r:.4f} QP {qp_r:.4f}")


def test_criterion_10_null_calibration():
    rates, se = null_rejection_rates(5000, SEED + 10)
    sig = np.array([0.01, 0.05, 0.10])
    z = np.abs(rates - sig) / se
    ok = bool(np.all(z <= 1.5))
    parts = [f"s={s}: {r:.4f} ({zz:.2f} SE)" for s, r, zz in zip(sig, rates, z)]
    assert record(10, ok, "; ".join(parts))
