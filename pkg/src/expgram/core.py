"""
Expectile loss, trigonometric expectile regression and the expectile periodogram.

The expectile periodogram at level ``alpha`` and Fourier frequency
``omega_nu = 2*pi*nu/n`` is ``(n/4) * (b_cos**2 + b_sin**2)`` where
``(b_0, b_cos, b_sin)`` minimizes the asymmetric squared loss of
``y_t - b_0 - b_cos*cos(omega_nu*t) - b_sin*sin(omega_nu*t)``, ``t = 1..n``.
At ``alpha = 0.5`` this is the ordinary periodogram.

Regressions are solved by iteratively reweighted least squares (IRLS). The
weights only take the two values ``alpha`` and ``1 - alpha``, so each step is
a weighted least-squares solve and the iteration stops once the sign pattern
of the residuals reproduces itself, at which point the solution is exact.
All (frequency, level) cells are solved together in a batch.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import (DegenerateDesign, InvalidLevel, InvalidSeries,
                         ZeroRow)

__all__ = [
    "DEFAULT_LEVELS", "MAX_ITERATIONS", "TimeSeries", "FrequencyGrid",
    "TrigFit", "PeriodogramMatrix", "as_series", "check_levels",
    "fourier_grid", "expectile_loss", "expectile_loss_derivative",
    "scalar_expectile", "trig_expectile_fit", "expectile_coefficients",
    "expectile_ordinates", "expectile_periodogram", "edft", "normalize",
]

DEFAULT_LEVELS = np.round(np.arange(0.05, 0.9501, 0.01), 2)
MAX_ITERATIONS = 100
OBJECTIVE_RTOL = 1e-12

# working-set budget (float64 elements) for one batch of frequency cells
_CHUNK_ELEMENTS = 1 << 22


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    """Real-valued observations ``y_1..y_n`` with an optional sampling rate.

    ``sample_rate`` is only used to label frequency axes.
    """
    values: np.ndarray
    sample_rate: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "values", as_series(self.values, min_length=1))
        if self.sample_rate is not None and not self.sample_rate > 0:
            raise InvalidSeries("sample_rate must be positive")

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_series(y, min_length=4) -> np.ndarray:
    """Validate and return ``y`` as a 1-D float array."""
    if isinstance(y, TimeSeries):
        y = y.values
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise InvalidSeries(f"expected a 1-D series, got shape {y.shape}")
    if y.size < min_length:
        raise InvalidSeries(f"series needs at least {min_length} values, got {y.size}")
    if not np.all(np.isfinite(y)):
        bad = int(np.flatnonzero(~np.isfinite(y))[0])
        raise InvalidSeries(f"non-finite value at position {bad}")
    return y


def check_levels(levels, name="level") -> np.ndarray:
    """Return ``levels`` as a 1-D array, checking ``0 < level < 1``."""
    arr = np.atleast_1d(np.asarray(levels, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidLevel(f"need a non-empty 1-D list of {name}s")
    if not np.all((arr > 0) & (arr < 1)):
        raise InvalidLevel(f"every {name} must lie strictly between 0 and 1")
    return arr


@dataclass(frozen=True)
class FrequencyGrid:
    """Fourier frequencies ``omega_nu = 2*pi*nu/n`` for ``nu = 1..floor(n/2)``."""
    n: int

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n // 2 + 1)

    @property
    def omegas(self) -> np.ndarray:
        return 2 * np.pi * self.indices / self.n

    @property
    def freqs(self) -> np.ndarray:
        """Frequencies in cycles per sample, ``f = nu/n``."""
        return self.indices / self.n

    @property
    def has_nyquist(self) -> bool:
        return self.n % 2 == 0

    def __len__(self):
        return self.n // 2

    def index_of(self, omega) -> int:
        """Column index of the Fourier frequency closest to ``omega``."""
        nu = int(round(omega * self.n / (2 * np.pi)))
        if not 1 <= nu <= self.n // 2:
            raise ValueError(f"omega={omega} is outside (0, pi]")
        return nu - 1


def fourier_grid(n) -> FrequencyGrid:
    return FrequencyGrid(int(n))


@dataclass
class TrigFit:
    """Solution of one trigonometric expectile (or quantile) regression.

    ``beta`` is ``(intercept, cos, sin)`` for ``0 < omega < pi``,
    ``(intercept, cos)`` at ``omega = pi`` and ``(intercept,)`` at ``omega = 0``.
    """
    omega: float
    alpha: float
    beta: np.ndarray
    iterations: int
    converged: bool
    objective: float
    trace: Optional[list] = None


@dataclass
class PeriodogramMatrix:
    """Periodogram ordinates on a (level x Fourier frequency) grid.

    Rows follow ``levels``; columns follow ``nu = 1..floor(n/2)``. The zero
    frequency is omitted (its ordinate is zero by convention). ``kind`` is
    ``"ep"``, ``"pg"`` or ``"qp"``; the ordinary periodogram is stored as a
    single row at level 0.5, where it coincides with the expectile periodogram.
    ``converged`` flags cells whose regression did not converge (``False``).
    """
    n: int
    levels: np.ndarray
    ordinates: np.ndarray
    normalized: bool = False
    kind: str = "ep"
    converged: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.levels = np.atleast_1d(np.asarray(self.levels, dtype=float))
        self.ordinates = np.atleast_2d(np.asarray(self.ordinates, dtype=float))
        expected = (self.levels.size, self.n // 2)
        if self.ordinates.shape != expected:
            raise ValueError(f"ordinates shape {self.ordinates.shape} != {expected}")
        if np.any(self.ordinates < 0):
            raise ValueError("periodogram ordinates must be nonnegative")
        if self.converged is None:
            self.converged = np.ones(self.ordinates.shape, dtype=bool)

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.n)

    @property
    def omegas(self):
        return self.grid.omegas

    @property
    def freqs(self):
        return self.grid.freqs

    def level_index(self, level) -> int:
        hit = np.flatnonzero(np.isclose(self.levels, level, rtol=0, atol=1e-9))
        if hit.size == 0:
            raise KeyError(f"level {level} not in {self.levels}")
        return int(hit[0])

    def row(self, level) -> np.ndarray:
        return self.ordinates[self.level_index(level)]

    def column(self, omega) -> np.ndarray:
        return self.ordinates[:, self.grid.index_of(omega)]


# ---------------------------------------------------------------------------
# Loss functions and scalar expectiles
# ---------------------------------------------------------------------------

def expectile_loss(u, alpha):
    """Asymmetric squared loss: ``alpha*u**2`` for ``u >= 0``, else ``(1-alpha)*u**2``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 0, alpha, 1 - alpha) * u * u
    return out[()] if out.ndim == 0 else out


def expectile_loss_derivative(u, alpha):
    u = np.asarray(u, dtype=float)
    out = 2 * np.where(u >= 0, alpha, 1 - alpha) * u
    return out[()] if out.ndim == 0 else out


def scalar_expectile(y, alpha):
    """Sample expectile(s) of ``y``.

    Solves ``sum_t expectile_loss_derivative(y_t - mu, alpha) = 0`` exactly:
    the left side is piecewise linear and decreasing in ``mu``, so the
    bracketing pair of order statistics is located and the linear piece is
    solved in closed form.

    Parameters
    ----------
    y : array_like
        Observations (at least one).
    alpha : float or array_like
        Level(s) in (0, 1).

    Returns
    -------
    float or ndarray
        One expectile per level, shaped like ``alpha``.
    """
    y = np.sort(as_series(y, min_length=1))
    scalar = np.ndim(alpha) == 0
    alphas = check_levels(alpha)
    n = y.size
    csum = np.cumsum(y)
    total = csum[-1]
    i = np.arange(n)
    out = np.empty(alphas.size)
    for k, a in enumerate(alphas):
        # normal-equation value at mu = y_(i), counting y_(0..i) as "below"
        g = a * (total - csum - (n - i - 1) * y) - (1 - a) * ((i + 1) * y - csum)
        j = int(np.searchsorted(-g, 0.0, side="left"))  # first i with g <= 0
        if j == 0 or j == n:
            # j == n only through rounding (g at the maximum is <= 0 exactly)
            out[k] = y[0] if j == 0 else y[-1]
            continue
        lo = csum[j - 1]
        mu = (a * (total - lo) + (1 - a) * lo) / (a * (n - j) + (1 - a) * j)
        out[k] = min(max(mu, y[j - 1]), y[j])
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Trigonometric regression
# ---------------------------------------------------------------------------

def _fourier_basis(n, nus) -> np.ndarray:
    """Design ``[1, cos, sin]`` of shape (len(nus), n, 3) for interior Fourier indices."""
    t = np.arange(1, n + 1)
    phase = 2 * np.pi * (np.outer(nus, t) % n) / n
    basis = np.empty((len(nus), n, 3))
    basis[..., 0] = 1.0
    basis[..., 1] = np.cos(phase)
    basis[..., 2] = np.sin(phase)
    return basis


def _nyquist_basis(n) -> np.ndarray:
    basis = np.ones((1, n, 2))
    basis[0, 1::2, 1] = 1.0
    basis[0, 0::2, 1] = -1.0   # cos(pi*t) at t = 1, 2, ...
    return basis


def _basis_for_omega(n, omega) -> np.ndarray:
    t = np.arange(1, n + 1)
    if omega == 0:
        return np.ones((1, n, 1))
    if np.isclose(omega, np.pi, rtol=0, atol=1e-12):
        return _nyquist_basis(n)
    nu = omega * n / (2 * np.pi)
    if np.isclose(nu, round(nu), rtol=0, atol=1e-9):
        return _fourier_basis(n, [int(round(nu))])
    basis = np.empty((1, n, 3))
    basis[0, :, 0] = 1.0
    basis[0, :, 1] = np.cos(omega * t)
    basis[0, :, 2] = np.sin(omega * t)
    return basis


def _irls(y, basis, alphas, max_iterations=MAX_ITERATIONS, record_trace=False):
    """Batched expectile regression of ``y`` on each design in ``basis``.

    Parameters
    ----------
    y : (n,) ndarray
    basis : (F, n, p) ndarray
    alphas : (L,) ndarray

    Returns
    -------
    beta (F, L, p), iterations (F, L), converged (F, L), objective (F, L),
    and the per-iteration objective trace (list of (F, L) arrays) if requested.
    """
    F, n, p = basis.shape
    L = alphas.size
    if n < p:
        raise DegenerateDesign(f"{n} observations for {p} regressors")
    pp = p * p
    gram = np.concatenate(
        [(basis[:, :, :, None] * basis[:, :, None, :]).reshape(F, n, pp),
         basis * y[None, :, None]], axis=2)
    full = gram.sum(axis=1)                          # (F, pp + p)
    basis_t = basis.transpose(0, 2, 1)
    a = alphas[None, :, None]

    def solve(sums):
        A = sums[..., :pp].reshape(sums.shape[:-1] + (p, p))
        return np.linalg.solve(A, sums[..., pp:, None])[..., 0]

    def residuals(beta):
        return y - beta @ basis_t                    # (F, L, n)

    def objective(r, lvl):
        return np.sum(np.where(r >= 0, lvl, 1 - lvl) * r * r, axis=-1)

    beta = np.repeat(solve(full)[:, None, :], L, axis=1)
    r = residuals(beta)
    obj = objective(r, a)
    mask = r >= 0
    # equal weights make the OLS start exact
    converged = np.repeat((alphas == 0.5)[None, :], F, axis=0)
    active = ~converged
    iterations = np.zeros((F, L), dtype=int)
    trace = [obj.copy()] if record_trace else None

    for _ in range(max_iterations):
        if not active.any():
            break
        sums = (1 - a) * full[:, None, :] + (2 * a - 1) * (mask @ gram)
        cand = solve(sums)
        cand_r = residuals(cand)
        cand_obj = objective(cand_r, a)
        full_step = cand_obj <= obj
        worse = active & ~full_step
        if worse.any():
            fi, li = np.nonzero(worse)
            cand[fi, li], cand_r[fi, li], cand_obj[fi, li] = _step_halving(
                y, basis[fi], beta[fi, li], cand[fi, li], obj[fi, li], alphas[li])
        new_mask = cand_r >= 0
        fixed = full_step & np.all(new_mask == mask, axis=-1)
        flat = (obj - cand_obj) <= OBJECTIVE_RTOL * cand_obj
        upd = active
        beta[upd] = cand[upd]
        obj[upd] = cand_obj[upd]
        mask[upd] = new_mask[upd]
        iterations[upd] += 1
        done = upd & (fixed | flat)
        converged |= done
        active &= ~done
        if record_trace:
            trace.append(obj.copy())
    return beta, iterations, converged, obj, trace


def _step_halving(y, basis, beta, cand, obj, alphas, max_halvings=60):
    """Damp IRLS steps that would increase the objective (rare, numerical)."""
    direction = cand - beta
    out_beta = beta.copy()
    out_r = y - np.einsum("bnp,bp->bn", basis, beta)
    out_obj = obj.copy()
    pending = np.ones(beta.shape[0], dtype=bool)
    step = 1.0
    for _ in range(max_halvings):
        step *= 0.5
        idx = np.flatnonzero(pending)
        if idx.size == 0:
            break
        trial = beta[idx] + step * direction[idx]
        r = y - np.einsum("bnp,bp->bn", basis[idx], trial)
        a = alphas[idx, None]
        val = np.sum(np.where(r >= 0, a, 1 - a) * r * r, axis=-1)
        ok = val <= obj[idx]
        hit = idx[ok]
        out_beta[hit], out_r[hit], out_obj[hit] = trial[ok], r[ok], val[ok]
        pending[hit] = False
    return out_beta, out_r, out_obj


def trig_expectile_fit(y, omega, alpha, max_iterations=MAX_ITERATIONS,
                       record_trace=False) -> TrigFit:
    """Trigonometric expectile regression at a single frequency.

    ``omega = 0`` fits an intercept only, ``omega = pi`` uses the regressors
    ``[1, cos(pi*t)]`` and anything in between uses ``[1, cos, sin]``.
    """
    y = as_series(y, min_length=1)
    alpha = float(check_levels(alpha)[0])
    if not 0 <= omega <= np.pi + 1e-12:
        raise ValueError("omega must lie in [0, pi]")
    basis = _basis_for_omega(y.size, omega)
    beta, it, conv, obj, trace = _irls(y, basis, np.array([alpha]),
                                       max_iterations, record_trace)
    return TrigFit(
        omega=float(omega), alpha=alpha, beta=beta[0, 0].copy(),
        iterations=int(it[0, 0]), converged=bool(conv[0, 0]),
        objective=float(obj[0, 0]),
        trace=[float(v[0, 0]) for v in trace] if record_trace else None)


def _chunks(n_freq, n, width):
    size = max(1, _CHUNK_ELEMENTS // max(1, n * width))
    for start in range(0, n_freq, size):
        yield slice(start, min(n_freq, start + size))


def expectile_coefficients(y, levels, nus=None, max_iterations=MAX_ITERATIONS):
    """Regression coefficients at the requested Fourier indices.

    Parameters
    ----------
    y : array_like
        The series (used as given, no demeaning).
    levels : array_like
        Expectile levels.
    nus : array_like of int, optional
        Fourier indices in ``1..floor(n/2)``; all of them by default.

    Returns
    -------
    beta : (L, K, 3) ndarray
        ``(intercept, cos, sin)``; at the Nyquist index the sine slot is 0.
    converged : (L, K) bool ndarray
    iterations : (L, K) int ndarray
    """
    y = as_series(y)
    levels = check_levels(levels)
    n = y.size
    nus = np.arange(1, n // 2 + 1) if nus is None else np.asarray(nus, dtype=int)
    if np.any((nus < 1) | (nus > n // 2)):
        raise ValueError("Fourier indices must lie in 1..floor(n/2)")
    L, K = levels.size, nus.size
    beta = np.zeros((L, K, 3))
    conv = np.ones((L, K), dtype=bool)
    iters = np.zeros((L, K), dtype=int)
    nyq = (nus == n // 2) & (n % 2 == 0)
    interior = np.flatnonzero(~nyq)
    for sl in _chunks(interior.size, n, 12 + 3 * L):
        cols = interior[sl]
        b, it, cv, _, _ = _irls(y, _fourier_basis(n, nus[cols]), levels, max_iterations)
        beta[:, cols, :] = b.transpose(1, 0, 2)
        conv[:, cols] = cv.T
        iters[:, cols] = it.T
    for col in np.flatnonzero(nyq):
        b, it, cv, _, _ = _irls(y, _nyquist_basis(n), levels, max_iterations)
        beta[:, col, :2] = b[0]
        conv[:, col] = cv[0]
        iters[:, col] = it[0]
    return beta, conv, iters


def _ordinates_from_beta(beta, nus, n):
    nyq = (nus == n // 2) & (n % 2 == 0)
    return np.where(nyq, n * beta[..., 1] ** 2,
                    0.25 * n * (beta[..., 1] ** 2 + beta[..., 2] ** 2))


def _is_constant(y):
    return np.all(y == y[0])


def expectile_ordinates(y, levels, nus=None, demean=True):
    """Expectile periodogram ordinates at a subset of Fourier indices.

    Returns ``(ordinates, converged)``, both shaped (levels, indices).
    """
    y = as_series(y)
    levels = check_levels(levels)
    n = y.size
    nus = np.arange(1, n // 2 + 1) if nus is None else np.asarray(nus, dtype=int)
    if _is_constant(y):
        return (np.zeros((levels.size, nus.size)),
                np.ones((levels.size, nus.size), dtype=bool))
    if demean:
        y = y - y.mean()
    beta, conv, _ = expectile_coefficients(y, levels, nus)
    return _ordinates_from_beta(beta, nus, n), conv


def expectile_periodogram(y, levels=DEFAULT_LEVELS, demean=True) -> PeriodogramMatrix:
    """Expectile periodogram on all Fourier frequencies ``nu = 1..floor(n/2)``.

    Parameters
    ----------
    y : array_like
        Series of length ``n >= 4``.
    levels : array_like
        Distinct expectile levels in (0, 1); sorted in the output.
    demean : bool
        Center ``y`` first, mirroring the ordinary periodogram convention.
        The intercept absorbs the mean, so this only affects rounding.

    Returns
    -------
    PeriodogramMatrix
        Cells whose regression hit the iteration cap are flagged in
        ``converged`` but still hold the best fit found.
    """
    levels = np.sort(check_levels(levels))
    if np.unique(levels).size != levels.size:
        raise InvalidLevel("levels must be distinct")
    y = as_series(y)
    ords, conv = expectile_ordinates(y, levels, demean=demean)
    return PeriodogramMatrix(y.size, levels, ords, kind="ep", converged=conv)


def edft(y, alpha, max_iterations=MAX_ITERATIONS) -> np.ndarray:
    """Expectile discrete Fourier transform at ``nu = 0, 1, ..., floor(n/2)``.

    ``z[0] = n*b_0`` (the intercept-only fit, i.e. ``n`` times the sample
    expectile), ``z[n/2] = n*b_cos`` at the Nyquist frequency for even ``n``,
    and ``(n/2)*(b_cos - 1j*b_sin)`` elsewhere, so that
    ``abs(z[nu])**2 / n`` is the expectile periodogram ordinate. No demeaning.
    """
    y = as_series(y)
    alpha = float(check_levels(alpha)[0])
    n = y.size
    nus = np.arange(1, n // 2 + 1)
    beta, _, _ = expectile_coefficients(y, [alpha], nus, max_iterations)
    beta = beta[0]
    z = np.empty(n // 2 + 1, dtype=complex)
    z[0] = n * scalar_expectile(y, alpha)
    z[1:] = 0.5 * n * (beta[:, 1] - 1j * beta[:, 2])
    if n % 2 == 0:
        z[-1] = n * beta[-1, 1]
    return z


def normalize(pm: PeriodogramMatrix) -> PeriodogramMatrix:
    """Scale each row to unit sum (the Nyquist ordinate, when present, is included)."""
    sums = pm.ordinates.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        bad = pm.levels[np.flatnonzero(sums[:, 0] <= 0)]
        raise ZeroRow(f"row(s) at level(s) {bad.tolist()} sum to zero")
    return replace(pm, ordinates=pm.ordinates / sums, normalized=True,
                   converged=pm.converged.copy())
