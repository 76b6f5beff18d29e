import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expgram import (asecp, expectile_periodogram, level_crossing_process,
                     ordinary_periodogram, quantile_fit, quantile_periodogram)
from expgram.classical import check_loss, check_loss_derivative, quantile_coefficients
from expgram.core import DEFAULT_LEVELS
from expgram.sim import Ar2, replicate_rng, simulate
from oracles import quantile_objective, quantile_oracle, trig_design

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
series = st.integers(6, 40).flatmap(lambda n: arrays(float, n, elements=finite))


# --- ordinary periodogram --------------------------------------------------------

def test_pg_constant_series_is_zero():
    pm = ordinary_periodogram(np.full(30, -4.0))
    assert np.all(pm.ordinates == 0)
    assert pm.kind == "pg" and pm.levels.tolist() == [0.5]


def test_pg_scaled_cosine():
    n, k = 100, 13
    y = 2 * np.cos(2 * np.pi * k / n * np.arange(1, n + 1))
    row = ordinary_periodogram(y).ordinates[0]
    assert row[k - 1] == pytest.approx(n, rel=1e-12)
    assert np.max(np.delete(row, k - 1)) < 1e-10


def test_pg_mean_matches_sample_variance():
    y = np.random.default_rng(11).standard_normal(1024)
    row = ordinary_periodogram(y).ordinates[0]
    assert row.mean() == pytest.approx(y.var(), rel=0.05)


@settings(max_examples=50)
@given(series)
def test_pg_parseval(y):
    n = y.size
    row = ordinary_periodogram(y).ordinates[0]
    # ordinates at nu and n - nu coincide; the Nyquist one appears once
    total = 2 * row.sum() - (row[-1] if n % 2 == 0 else 0.0)
    ss = np.sum((y - y.mean()) ** 2)
    assert total == pytest.approx(ss, rel=1e-6, abs=1e-9 * (1 + ss))


# --- check loss --------------------------------------------------------------------

@pytest.mark.parametrize("u,theta,expected", [(2, 0.25, 0.5), (-2, 0.25, 1.5), (0, 0.3, 0.0),
                                              (0, 0.9, 0.0)])
def test_check_loss_examples(u, theta, expected):
    assert check_loss(u, theta) == pytest.approx(expected)


def test_check_loss_weak_derivative_at_zero():
    assert check_loss_derivative(0.0, 0.3) == 0.3
    assert check_loss_derivative(-1.0, 0.3) == pytest.approx(-0.7)


# --- quantile periodogram ---------------------------------------------------------

def test_intercept_only_median():
    fit = quantile_fit([1.0, 2.0, 3.0], 0.0, 0.5)
    assert fit.beta[0] == pytest.approx(2.0)


def test_qp_scaled_cosine_peak():
    # The cosine's own ordinate is exactly n and the largest, but median
    # regression also fits many points of a pure cosine exactly at other
    # frequencies, so the runner-up is far from negligible (26.06 here, a
    # value the vertex-enumeration oracle reproduces).
    n, k = 63, 9
    y = 2 * np.cos(2 * np.pi * k / n * np.arange(1, n + 1))
    row = quantile_periodogram(y, [0.5]).ordinates[0]
    assert row[k - 1] == pytest.approx(n, rel=1e-10)
    others = np.delete(row, k - 1)
    assert row[k - 1] > 2 * others.max()
    j = int(np.argmax(row * (np.arange(1, row.size + 1) != k))) + 1
    beta, _, unique = quantile_oracle(y, trig_design(n, j), 0.5)
    assert unique
    assert row[j - 1] == pytest.approx(n / 4 * (beta[1] ** 2 + beta[2] ** 2), rel=1e-8)


def test_qp_even_length_mirror_frequency():
    # For even n, cos(2*pi*(n/2 - k)*t/n) = (-1)**t * cos(2*pi*k*t/n): a slope
    # of -2 fits every other point exactly, which is an L1 optimum.
    n, k = 64, 9
    y = 2 * np.cos(2 * np.pi * k / n * np.arange(1, n + 1))
    row = quantile_periodogram(y, [0.5]).ordinates[0]
    assert row[k - 1] == pytest.approx(n) and row[n // 2 - k - 1] == pytest.approx(n)


@settings(max_examples=40, deadline=None)
@given(series, st.floats(0.05, 0.95), st.data())
def test_qp_beats_ols(y, theta, data):
    n = y.size
    nu = data.draw(st.integers(1, n // 2))
    X = trig_design(n, nu)
    fit = quantile_fit(y, 2 * np.pi * nu / n, theta)
    ols = np.linalg.lstsq(X, y, rcond=None)[0]
    assert quantile_objective(y, X, theta, fit.beta[:X.shape[1]]) <= \
        quantile_objective(y, X, theta, ols) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 30), st.floats(0.05, 0.95), st.integers(0, 10_000))
def test_qp_matches_vertex_enumeration(n, theta, seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    nu = int(rng.integers(1, n // 2 + 1))
    X = trig_design(n, nu)
    fit = quantile_fit(y, 2 * np.pi * nu / n, theta)
    beta, obj, unique = quantile_oracle(y, X, theta)
    got = quantile_objective(y, X, theta, fit.beta[:X.shape[1]])
    assert got == pytest.approx(obj, rel=1e-8, abs=1e-12)
    if unique:
        assert np.allclose(fit.beta[:X.shape[1]], beta, atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 30), st.floats(0.05, 0.95), st.integers(0, 10_000))
def test_qp_tied_data_matches_vertex_enumeration(n, theta, seed):
    # coarse rounding creates ties and degenerate vertices
    rng = np.random.default_rng(seed)
    y = np.round(rng.standard_normal(n) * 2) / 2
    nu = int(rng.integers(1, n // 2 + 1))
    X = trig_design(n, nu)
    fit = quantile_fit(y, 2 * np.pi * nu / n, theta)
    _, obj, _ = quantile_oracle(y, X, theta)
    got = quantile_objective(y, X, theta, fit.beta[:X.shape[1]])
    assert fit.converged
    assert got == pytest.approx(obj, rel=1e-8, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(series, st.floats(-50, 50), st.data())
def test_qp_objective_shift_invariant(y, c, data):
    # the optimal value is shift invariant even when tied data make the
    # minimizer (and so the ordinate) non-unique
    n = y.size
    nu = data.draw(st.integers(1, n // 2))
    w = 2 * np.pi * nu / n
    a, b = quantile_fit(y, w, 0.5), quantile_fit(y + c, w, 0.5)
    assert b.objective == pytest.approx(a.objective, rel=1e-9, abs=1e-9 * (1 + np.abs(y).max() + abs(c)))


@settings(max_examples=20, deadline=None)
@given(st.integers(6, 25), st.integers(0, 10_000), st.floats(-50, 50))
def test_laplace_periodogram_shift_invariant(n, seed, c):
    # even-sized samples can leave the median fit non-unique (as with the
    # plain median), so only frequencies with a unique optimum are compared
    y = np.random.default_rng(seed).standard_cauchy(n)
    a = quantile_periodogram(y, [0.5], demean=False).ordinates[0]
    b = quantile_periodogram(y + c, [0.5], demean=False).ordinates[0]
    unique = np.array([quantile_oracle(y, trig_design(n, nu), 0.5)[2]
                       for nu in range(1, n // 2 + 1)])
    tol = 1e-8 * (1 + np.abs(y).max() + abs(c)) ** 2
    assert np.allclose(a[unique], b[unique], rtol=1e-7, atol=tol)


def test_qp_full_grid_certified():
    y = simulate(Ar2(), 200, replicate_rng(5, 0))
    pm = quantile_periodogram(y)
    assert pm.ordinates.shape == (DEFAULT_LEVELS.size, 100)
    assert pm.converged.all()


def test_qp_coefficients_nyquist_slot():
    y = np.random.default_rng(8).standard_normal(20)
    beta, ok = quantile_coefficients(y, [0.4])
    assert ok.all()
    assert beta[0, -1, 2] == 0.0


# --- level crossings and ASECP -----------------------------------------------------

def test_lcp_examples():
    assert level_crossing_process([1, 2, 3, 4], 0.5).sum() == 2
    b = level_crossing_process(np.arange(100.0), 0.9)
    assert np.all(b[90:] == 1) and np.all(b[:89] == 0)
    y = np.random.default_rng(21).standard_normal(1000)
    assert level_crossing_process(y, 0.8).mean() == pytest.approx(0.2, rel=0.05)


def test_asecp_examples():
    y = np.random.default_rng(22).standard_normal(50)
    assert np.allclose(asecp(y, 0.5), y - y.mean(), atol=1e-13)
    assert np.all(asecp(np.full(9, 2.0), 0.8) == 0)


@given(arrays(float, st.integers(2, 60), elements=finite), st.floats(0.02, 0.98))
def test_asecp_mean_zero(y, alpha):
    assert abs(asecp(y, alpha).mean()) <= 1e-8 * (1 + np.abs(y).max())


def test_asecp_periodogram_peak_matches_ep():
    y = simulate(Ar2(0.9, 2 * np.pi * 0.2), 512, replicate_rng(17, 0))
    ep = expectile_periodogram(y, [0.9]).ordinates[0]
    pg = ordinary_periodogram(asecp(y, 0.9)).ordinates[0]
    assert abs(int(np.argmax(ep)) - int(np.argmax(pg))) <= 1


# --- EP smoother than QP across levels ------------------------------------------------

@pytest.mark.slow
def test_ep_smoother_than_qp_per_replicate(smoothness_ar2):
    ep, qp = smoothness_ar2["ep_var"][:, 0], smoothness_ar2["qp_var"][:, 0]
    assert np.mean(ep < qp) >= 0.9
