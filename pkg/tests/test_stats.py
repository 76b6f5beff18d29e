import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expgram import expectile_periodogram, ordinary_periodogram
from expgram.core import PeriodogramMatrix
from expgram.exceptions import AllZero
from expgram.experiments import null_rejection_rates
from expgram.stats import (chi2_limit_check, fisher_frequencies, fisher_statistic,
                           fisher_tail, fisher_test)


@pytest.mark.parametrize("ords, g", [([4, 1, 1, 2], 0.5), ([1.0] * 10, 0.1), ([1, 0, 0], 1.0)])
def test_fisher_statistic_examples(ords, g):
    assert fisher_statistic(ords).statistic == pytest.approx(g)


def test_fisher_statistic_ties_go_low():
    res = fisher_statistic([1, 3, 3, 2], freqs=[0.1, 0.2, 0.3, 0.4])
    assert res.argmax_frequency == 0.2 and res.q == 4


def test_fisher_statistic_all_zero():
    with pytest.raises(AllZero):
        fisher_statistic([0.0, 0.0, 0.0])


@pytest.mark.parametrize("x, q, p", [(0.6, 2, 0.8), (0.5, 2, 1.0), (0.4, 3, 0.96)])
def test_fisher_tail_examples(x, q, p):
    assert fisher_tail(x, q) == pytest.approx(p, abs=1e-14)


def _mc_tail(x, q, draws, seed):
    # normalized iid exponentials are uniform spacings: the white-noise law
    e = np.random.default_rng(seed).exponential(size=(draws, q))
    hits = (e.max(axis=1) / e.sum(axis=1) > x)
    return hits.mean(), np.sqrt(hits.mean() * (1 - hits.mean()) / draws)


@pytest.mark.parametrize("q, x", [(2, 0.6), (3, 0.4), (10, 0.2), (50, 0.06)])
def test_fisher_tail_against_simulation(q, x):
    p, se = _mc_tail(x, q, 100_000, seed=q)
    assert abs(fisher_tail(x, q) - p) < 4 * se


@settings(max_examples=60, deadline=None)
@given(q=st.integers(2, 400), a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_fisher_tail_monotone(q, a, b):
    lo, hi = sorted((a, b))
    x1, x2 = 1 / q + lo * (1 - 1 / q), 1 / q + hi * (1 - 1 / q)
    t1, t2 = fisher_tail(x1, q), fisher_tail(x2, q)
    assert 0.0 <= t2 <= t1 <= 1.0
    if x2 - x1 > 1e-3 and t1 > 1e-12:
        assert t2 < t1


@settings(max_examples=60, deadline=None)
@given(vals=st.lists(st.floats(0.0, 1e6), min_size=2, max_size=40).filter(lambda v: max(v) > 1e-200),
       c=st.floats(1e-6, 1e6))
def test_fisher_statistic_scale_invariant(vals, c):
    a = fisher_statistic(vals).statistic
    b = fisher_statistic(np.asarray(vals) * c).statistic
    assert b == pytest.approx(a, rel=1e-12)
    assert 1 / len(vals) - 1e-12 <= a <= 1.0


def test_fisher_frequencies_interior_only():
    assert fisher_frequencies(8).tolist() == [0, 1, 2]
    assert fisher_frequencies(9).tolist() == [0, 1, 2, 3]
    assert fisher_frequencies(8, include_nyquist=True).tolist() == [0, 1, 2, 3]
    assert fisher_frequencies(100, band=(0.1, 0.12)).tolist() == [9, 10, 11]


def test_sinusoid_rejected():
    n = 128
    t = np.arange(1, n + 1)
    y = np.cos(2 * np.pi * 10 * t / n) + 0.1 * np.random.default_rng(0).standard_normal(n)
    res = fisher_test(ordinary_periodogram(y), significance=0.01)
    assert res.reject and res.argmax_frequency == pytest.approx(10 / n)


def test_flat_row_never_rejects():
    pm = PeriodogramMatrix(20, np.array([0.5]), np.ones((1, 10)))
    res = fisher_test(pm, significance=0.10)
    assert res.p_value == 1.0 and not res.reject


def test_fisher_on_ep_is_normalization_invariant():
    y = np.random.default_rng(3).standard_normal(100)
    pm = expectile_periodogram(y, [0.2, 0.9])
    from expgram import normalize
    a, b = fisher_test(pm, 1), fisher_test(normalize(pm), 1)
    assert a.statistic == pytest.approx(b.statistic, rel=1e-12)


def test_chi2_check_exact_exponential():
    x = np.random.default_rng(11).exponential(size=5000)
    d = chi2_limit_check(x, reference=1.0)
    assert d.passes_ks


def test_chi2_check_detects_doubled_reference():
    x = np.random.default_rng(11).exponential(size=5000)
    assert not chi2_limit_check(x, reference=2.0).passes_ks


def test_chi2_check_needs_replicates():
    with pytest.raises(ValueError):
        chi2_limit_check(np.ones(10))


def test_white_noise_ordinate_dispersion():
    # 5000 PG ordinates at one interior frequency, n=1024
    rng = np.random.default_rng(5)
    y = rng.standard_normal((5000, 1024))
    y -= y.mean(axis=1, keepdims=True)
    z = np.fft.rfft(y, axis=1)[:, 100]
    d = chi2_limit_check(np.abs(z) ** 2 / 1024)
    assert 0.85 <= d.var_mean_ratio <= 1.15 and d.passes_ks


def test_null_rejection_rates_small():
    rates, se = null_rejection_rates(2000, seed=8)
    assert np.all(np.abs(rates - np.array([0.01, 0.05, 0.10])) < 3 * se)
