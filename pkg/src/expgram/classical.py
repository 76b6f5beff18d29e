"""
Baselines: ordinary periodogram, quantile periodogram, level-crossing and
expectile-crossing processes.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .core import (DEFAULT_LEVELS, PeriodogramMatrix, TrigFit, _basis_for_omega,
                   _chunks, _fourier_basis, _is_constant, _nyquist_basis,
                   _ordinates_from_beta, as_series, check_levels,
                   expectile_loss_derivative, scalar_expectile)

__all__ = [
    "ordinary_periodogram", "check_loss", "check_loss_derivative",
    "quantile_fit", "quantile_coefficients", "quantile_ordinates",
    "quantile_periodogram", "level_crossing_process", "asecp",
]


def ordinary_periodogram(y, demean=True) -> PeriodogramMatrix:
    """``|sum_t y_t exp(-i*omega_nu*t)|**2 / n`` for ``nu = 1..floor(n/2)``.

    Stored as a one-row matrix at level 0.5.
    """
    y = as_series(y)
    n = y.size
    if _is_constant(y) and demean:
        ords = np.zeros(n // 2)
    else:
        z = np.fft.rfft(y - y.mean() if demean else y)
        ords = np.abs(z[1:n // 2 + 1]) ** 2 / n
    return PeriodogramMatrix(n, [0.5], ords[None, :], kind="pg")


def check_loss(u, theta):
    """Quantile-regression check loss ``u*(theta - I(u < 0))``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 0, theta * u, (theta - 1) * u)
    return out[()] if out.ndim == 0 else out


def check_loss_derivative(u, theta):
    """Weak derivative of the check loss; ``theta`` is assigned at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 0, theta, theta - 1.0)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quantile regression solver
# ---------------------------------------------------------------------------
#
# A batched L1-IRLS pass gets every cell close to its optimum; the p
# smallest residuals then define a starting vertex, and an exact simplex-type
# vertex descent (Barrodale-Roberts pivoting with a weighted-median line
# search) finishes. A vertex is accepted only with a dual certificate, so the
# returned coefficients are exact minimizers. Degenerate cells (ties among
# residuals, e.g. perfectly periodic data) are re-solved by an LP.

_WARM_ITERATIONS = 12
_DUAL_TOL = 1e-10


def _warm_start(y, basis, thetas, iterations=_WARM_ITERATIONS):
    F, n, p = basis.shape
    pp = p * p
    gram = np.concatenate(
        [(basis[:, :, :, None] * basis[:, :, None, :]).reshape(F, n, pp),
         basis * y[None, :, None]], axis=2)
    basis_t = basis.transpose(0, 2, 1)

    def solve(w):
        sums = w @ gram
        A = sums[..., :pp].reshape(sums.shape[:-1] + (p, p))
        # a relative ridge keeps heavily weighted, rank-deficient subsets
        # solvable; the exact descent afterwards removes its effect
        ridge = 1e-12 * np.trace(A, axis1=-2, axis2=-1)[..., None, None] * np.eye(p)
        return np.linalg.solve(A + ridge, sums[..., pp:, None])[..., 0]

    th = thetas[None, :, None]
    beta = solve(np.ones((F, 1, n)))
    beta = np.repeat(beta, thetas.size, axis=1)
    dev = np.abs(y - np.median(y))
    scale = np.median(dev) or dev.max() or abs(np.median(y)) or 1.0
    floor = max(1e-6 * scale, np.finfo(float).tiny)
    for _ in range(iterations):
        r = y - beta @ basis_t
        w = np.where(r >= 0, th, 1 - th) / np.maximum(np.abs(r), floor)
        # rescaling the weights leaves the fit unchanged and avoids overflow
        beta = solve(w / w.max(axis=-1, keepdims=True))
    return beta, y - beta @ basis_t


def _vertex_descent(y, X, theta, h, max_pivots):
    """Exact vertex descent for a batch of quantile regressions.

    Parameters
    ----------
    y : (n,) ndarray
    X : (B, n, p) ndarray of designs
    theta : (B,) ndarray of levels
    h : (B, p) int ndarray of starting basis (rows fitted exactly)

    Returns
    -------
    beta : (B, p) ndarray
    ok : (B,) bool, True where a dual certificate was obtained
    h : (B, p) int ndarray, the final basis
    """
    B, n, p = X.shape
    beta = np.zeros((B, p))
    status = np.zeros(B, dtype=int)          # 0 active, 1 optimal, 2 failed
    h = h.copy()
    scale = np.max(np.abs(y)) + 1e-300
    ztol = 1e-11 * scale
    eye = np.eye(p)
    for _ in range(max_pivots):
        idx = np.flatnonzero(status == 0)
        if idx.size == 0:
            break
        Xa, ha, th = X[idx], h[idx], theta[idx]
        Xh = np.take_along_axis(Xa, ha[:, :, None], axis=1)
        # reject near-singular bases
        norms = np.prod(np.linalg.norm(Xh, axis=2), axis=1)
        singular = np.abs(np.linalg.det(Xh)) <= 1e-10 * norms
        if singular.any():
            status[idx[singular]] = 2
            keep = ~singular
            idx, Xa, ha, th, Xh = idx[keep], Xa[keep], ha[keep], th[keep], Xh[keep]
            if idx.size == 0:
                continue
        rows = np.arange(idx.size)
        b = np.linalg.solve(Xh, y[ha][..., None])[..., 0]
        r = y - np.einsum("bnp,bp->bn", Xa, b)
        basic = np.zeros(r.shape, dtype=bool)
        basic[rows[:, None], ha] = True
        r[basic] = 0.0
        degenerate = np.any(~basic & (np.abs(r) <= ztol), axis=1)
        psi = np.where(r > 0, th[:, None], th[:, None] - 1.0)
        psi[basic] = 0.0
        g = np.einsum("bn,bnp->bp", psi, Xa)
        dual = -np.linalg.solve(Xh.transpose(0, 2, 1), g[..., None])[..., 0]
        over = dual - th[:, None]
        under = (th[:, None] - 1.0) - dual
        viol = np.maximum(over, under)
        j = np.argmax(viol, axis=1)
        worst = viol[rows, j]
        optimal = worst <= _DUAL_TOL
        beta[idx[optimal]] = b[optimal]
        status[idx[optimal]] = 1
        status[idx[~optimal & degenerate]] = 2
        go = ~optimal & ~degenerate
        if not go.any():
            continue
        idx, Xa, Xh, th, b, r, basic = (idx[go], Xa[go], Xh[go], th[go], b[go],
                                        r[go], basic[go])
        j, over, under, dual = j[go], over[go], under[go], dual[go]
        rows = np.arange(idx.size)
        # leave vertex by letting row j's residual become positive (s=+1) or negative
        s = np.where(over[rows, j] >= under[rows, j], 1.0, -1.0)
        d = np.linalg.solve(Xh, (-s[:, None] * eye[j])[..., None])[..., 0]
        c = np.einsum("bnp,bp->bn", Xa, d)
        slope0 = -s * dual[rows, j] + np.where(s > 0, th, 1.0 - th)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r / c
        valid = ~basic & (np.abs(c) > 1e-14) & (step > 0)
        step = np.where(valid, step, np.inf)
        order = np.argsort(step, axis=1, kind="stable")
        step_sorted = np.take_along_axis(step, order, axis=1)
        gain = np.take_along_axis(np.where(valid, np.abs(c), 0.0), order, axis=1)
        slope = slope0[:, None] + np.cumsum(gain, axis=1)
        k = np.argmax(slope >= 0, axis=1)
        found = (slope[rows, k] >= 0) & np.isfinite(step_sorted[rows, k])
        status[idx[~found]] = 2
        h[idx[found], j[found]] = order[rows[found], k[found]]
    return beta, status == 1, h


def _initial_basis(X, order, p):
    """First ``p`` rows along ``order`` (per cell) that are linearly independent."""
    B = X.shape[0]
    rows = np.arange(B)
    q = np.zeros((B, p, X.shape[2]))       # orthonormal rows accepted so far
    h = np.zeros((B, p), dtype=int)
    count = np.zeros(B, dtype=int)
    for k in range(order.shape[1]):
        need = count < p
        if not need.any():
            break
        cand = order[:, k]
        v = X[rows, cand]
        v = v - np.einsum("bij,bi->bj", q, np.einsum("bij,bj->bi", q, v))
        norm = np.linalg.norm(v, axis=1)
        take = need & (norm > 1e-8 * np.linalg.norm(X[rows, cand], axis=1))
        t = rows[take]
        q[t, count[t]] = v[take] / norm[take, None]
        h[t, count[t]] = cand[take]
        count[take] += 1
    return h, count == p


def _tie_broken(y, X, theta, h, max_pivots):
    """Re-solve degenerate cells after nudging ``y`` off its ties.

    The vertex optimal for the nudged data carries a dual certificate. That
    certificate also holds for the original data provided no residual that
    is clearly nonzero there changes sign, since a zero residual admits any
    subgradient in ``[theta - 1, theta]``. Cells failing that check stay
    uncertified.
    """
    n = y.size
    scale = np.max(np.abs(y)) + 1e-300
    nudge = (np.arange(1, n + 1) * 0.6180339887498949) % 1.0 - 0.5
    bp, okp, hp = _vertex_descent(y + 1e-9 * scale * nudge, X, theta, h, max_pivots)
    Xh = np.take_along_axis(X, hp[:, :, None], axis=1)
    beta = np.zeros_like(bp)
    ok = np.zeros(okp.shape, dtype=bool)
    good = okp & (np.abs(np.linalg.det(Xh)) > 1e-10 * np.prod(np.linalg.norm(Xh, axis=2), axis=1))
    if good.any():
        b = np.linalg.solve(Xh[good], y[hp[good]][..., None])[..., 0]
        r = y - np.einsum("bnp,bp->bn", X[good], b)
        rp = (y + 1e-9 * scale * nudge) - np.einsum("bnp,bp->bn", X[good], bp[good])
        clear = np.abs(r) > 1e-7 * scale
        same = np.all(~clear | (np.sign(r) == np.sign(rp)), axis=1)
        beta[np.flatnonzero(good)] = b
        ok[np.flatnonzero(good)] = same
    return beta, ok


def _lp_fit(y, X, theta):
    """Quantile regression as a linear program (fallback for degenerate cells)."""
    n, p = X.shape
    cost = np.concatenate([np.zeros(p), np.full(n, theta), np.full(n, 1 - theta)])
    A_eq = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    res = linprog(cost, A_eq=A_eq, b_eq=y, bounds=bounds, method="highs")
    if res.status != 0:
        return np.linalg.lstsq(X, y, rcond=None)[0], False
    return res.x[:p], True


def _quantile_batch(y, basis, thetas):
    """Solve every (design, level) pair; returns beta (F, L, p) and ok (F, L)."""
    F, n, p = basis.shape
    L = thetas.size
    _, resid = _warm_start(y, basis, thetas)
    m = min(n, 4 * p + 16)
    near = np.argpartition(np.abs(resid), m - 1, axis=-1)[..., :m]
    near = np.take_along_axis(
        near, np.argsort(np.take_along_axis(np.abs(resid), near, -1), -1), -1)
    X = np.repeat(basis, L, axis=0)
    th = np.tile(thetas, F)
    h, found = _initial_basis(X, near.reshape(F * L, m), p)
    h[~found] = _initial_basis(X[~found], np.tile(np.arange(n), ((~found).sum(), 1)), p)[0]
    pivots = 20 * p + 2 * n
    beta, ok, h = _vertex_descent(y, X, th, h, max_pivots=pivots)
    if not ok.all():
        bad = np.flatnonzero(~ok)
        beta[bad], ok[bad] = _tie_broken(y, X[bad], th[bad], h[bad], pivots)
    for b in np.flatnonzero(~ok):
        beta[b], ok[b] = _lp_fit(y, X[b], th[b])
    return beta.reshape(F, L, p), ok.reshape(F, L)


def quantile_fit(y, omega, theta) -> TrigFit:
    """Trigonometric quantile regression at one frequency (exact minimizer)."""
    y = as_series(y, min_length=1)
    theta = float(check_levels(theta, "quantile level")[0])
    basis = _basis_for_omega(y.size, omega)
    if basis.shape[2] > y.size:
        from .exceptions import DegenerateDesign
        raise DegenerateDesign("fewer observations than regressors")
    beta, ok = _quantile_batch(y, basis, np.array([theta]))
    b = beta[0, 0]
    obj = float(np.sum(check_loss(y - basis[0] @ b, theta)))
    return TrigFit(omega=float(omega), alpha=theta, beta=b, iterations=0,
                   converged=bool(ok[0, 0]), objective=obj)


def quantile_coefficients(y, thetas, nus=None):
    """Quantile-regression counterpart of :func:`expectile_coefficients`."""
    y = as_series(y)
    thetas = check_levels(thetas, "quantile level")
    n = y.size
    nus = np.arange(1, n // 2 + 1) if nus is None else np.asarray(nus, dtype=int)
    L, K = thetas.size, nus.size
    beta = np.zeros((L, K, 3))
    ok = np.ones((L, K), dtype=bool)
    nyq = (nus == n // 2) & (n % 2 == 0)
    interior = np.flatnonzero(~nyq)
    for sl in _chunks(interior.size, n, 16 + 4 * L):
        cols = interior[sl]
        b, good = _quantile_batch(y, _fourier_basis(n, nus[cols]), thetas)
        beta[:, cols, :] = b.transpose(1, 0, 2)
        ok[:, cols] = good.T
    for col in np.flatnonzero(nyq):
        b, good = _quantile_batch(y, _nyquist_basis(n), thetas)
        beta[:, col, :2] = b[0]
        ok[:, col] = good[0]
    return beta, ok


def quantile_ordinates(y, thetas, nus=None, demean=True):
    y = as_series(y)
    thetas = check_levels(thetas, "quantile level")
    n = y.size
    nus = np.arange(1, n // 2 + 1) if nus is None else np.asarray(nus, dtype=int)
    if _is_constant(y):
        return (np.zeros((thetas.size, nus.size)),
                np.ones((thetas.size, nus.size), dtype=bool))
    if demean:
        y = y - y.mean()
    beta, ok = quantile_coefficients(y, thetas, nus)
    return _ordinates_from_beta(beta, nus, n), ok


def quantile_periodogram(y, thetas=DEFAULT_LEVELS, demean=True) -> PeriodogramMatrix:
    """Quantile periodogram ``(n/4)*(b_cos**2 + b_sin**2)`` from trigonometric
    quantile regression; ``theta = 0.5`` gives the Laplace periodogram.

    Cells that needed the LP fallback and still failed are flagged in
    ``converged``.
    """
    thetas = np.sort(check_levels(thetas, "quantile level"))
    y = as_series(y)
    ords, ok = quantile_ordinates(y, thetas, demean=demean)
    return PeriodogramMatrix(y.size, thetas, ords, kind="qp", converged=ok)


def level_crossing_process(y, theta) -> np.ndarray:
    """Indicator ``y_t > q`` with ``q`` the empirical ``theta``-quantile
    (linear interpolation between order statistics)."""
    y = as_series(y, min_length=1)
    theta = float(check_levels(theta, "quantile level")[0])
    q = np.quantile(y, theta, method="linear")
    return (y > q).astype(int)


def asecp(y, alpha) -> np.ndarray:
    """Asymmetrically-scaled expectile crossing process
    ``expectile_loss_derivative(y_t - mu, alpha)`` with ``mu`` the sample expectile.
    """
    y = as_series(y, min_length=1)
    alpha = float(check_levels(alpha)[0])
    if _is_constant(y):
        return np.zeros(y.size)
    return expectile_loss_derivative(y - scalar_expectile(y, alpha), alpha)
