"""
Generative models and a seeded Monte Carlo engine.

Every replicate draws from its own PCG64 stream derived from ``(seed, index)``
through :class:`numpy.random.SeedSequence`, so results do not depend on the
order or concurrency in which replicates run.

Recursive models start at zero and discard ``burn_in`` samples. The retained
innovations are drawn before the burn-in innovations, so changing
``burn_in`` only changes the (forgotten) initial state, not the noise that
drives the kept segment.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Union

import numpy as np
from scipy.signal import lfilter

from .exceptions import NonStationary, ReplicateError

__all__ = [
    "DEFAULT_BURN_IN", "Ar2", "HiddenPeriodicity", "Mixture", "Garch11",
    "McConfig", "McSummary", "replicate_rng", "gen_ar2", "gen_hidden",
    "gen_mixture", "gen_garch", "simulate", "monte_carlo", "model_from_dict",
    "model_to_dict",
]

DEFAULT_BURN_IN = 500
TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class Ar2:
    """``x_t = phi1*x_{t-1} + phi2*x_{t-2} + e_t`` with ``phi1 = 2r*cos(omega_c)``,
    ``phi2 = -r**2``: a spectral peak near ``omega_c`` that sharpens as ``r -> 1``."""
    r: float = 0.6
    omega_c: float = TWO_PI * 0.25
    innovation_sd: float = 1.0

    def __post_init__(self):
        if not 0 <= self.r < 1:
            raise NonStationary(f"AR(2) needs 0 <= r < 1, got r={self.r}")
        if not self.innovation_sd > 0:
            raise ValueError("innovation_sd must be positive")

    @property
    def phi(self):
        return 2 * self.r * np.cos(self.omega_c), -self.r ** 2


@dataclass(frozen=True)
class HiddenPeriodicity:
    """``y_t = a_t*x_t`` with ``a_t = b0 + b1*cos(omega_0*t) + b2*sin(omega_1*t)``
    and ``x_t`` an AR(2) carrier; the modulator only affects the variance."""
    b0: float = 1.0
    b1: float = 0.9
    b2: float = 1.0
    omega_0: float = TWO_PI * 0.10
    omega_1: float = TWO_PI * 0.12
    carrier: Ar2 = field(default_factory=Ar2)

    def modulator(self, n):
        t = np.arange(1, n + 1)
        return self.b0 + self.b1 * np.cos(self.omega_0 * t) + self.b2 * np.sin(self.omega_1 * t)


def _ramp(x, low_x, high_x, low_val, high_val):
    """``low_val`` below ``low_x``, ``high_val`` above ``high_x``, linear between."""
    return np.interp(x, [low_x, high_x], [low_val, high_val])


@dataclass(frozen=True)
class Mixture:
    """Nonlinear mixture of a lowpass AR(1), a highpass AR(1) and a bandpass
    lag-2 AR process::

        z_t = W1(x1) x1 + (1 - W1(x1)) x2
        y_t = W2(z) z + (1 - W2(z)) x3
    """
    ar1_coef: float = 0.8
    ar2_coef: float = -0.75
    ar3_lag2_coef: float = -0.81
    w1_range: tuple = (-0.8, 0.8)
    w1_values: tuple = (0.9, 0.2)
    w2_range: tuple = (-0.4, 0.0)
    w2_values: tuple = (0.5, 1.0)

    def __post_init__(self):
        if max(abs(self.ar1_coef), abs(self.ar2_coef), abs(self.ar3_lag2_coef)) >= 1:
            raise NonStationary("mixture components must be stationary")

    def W1(self, x):
        return _ramp(x, *self.w1_range, *self.w1_values)

    def W2(self, x):
        return _ramp(x, *self.w2_range, *self.w2_values)


@dataclass(frozen=True)
class Garch11:
    """``y_t ~ N(0, s_t**2)``, ``s_t**2 = omega + a*y_{t-1}**2 + b*s_{t-1}**2``."""
    omega: float = 1e-6
    a: float = 0.49
    b: float = 0.49

    def __post_init__(self):
        if self.omega <= 0 or self.a < 0 or self.b < 0:
            raise ValueError("GARCH parameters must be positive")
        if self.a + self.b >= 1:
            raise NonStationary(f"GARCH(1,1) needs a + b < 1, got {self.a + self.b}")

    @property
    def unconditional_variance(self):
        return self.omega / (1 - self.a - self.b)


SimModel = Union[Ar2, HiddenPeriodicity, Mixture, Garch11]


def replicate_rng(seed, index) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def _innovations(rng, shape_main, burn_in):
    main = rng.standard_normal(shape_main)
    burn = rng.standard_normal(shape_main[:-1] + (burn_in,))
    return np.concatenate([burn, main], axis=-1)


def gen_ar2(model: Ar2, n, rng, burn_in=DEFAULT_BURN_IN) -> np.ndarray:
    phi1, phi2 = model.phi
    e = model.innovation_sd * _innovations(rng, (n,), burn_in)
    return lfilter([1.0], [1.0, -phi1, -phi2], e)[burn_in:]


def gen_hidden(model: HiddenPeriodicity, n, rng, burn_in=DEFAULT_BURN_IN) -> np.ndarray:
    return model.modulator(n) * gen_ar2(model.carrier, n, rng, burn_in)


def gen_mixture(n, rng, model: Mixture = Mixture(), burn_in=DEFAULT_BURN_IN) -> np.ndarray:
    e = _innovations(rng, (3, n), burn_in)
    x1 = lfilter([1.0], [1.0, -model.ar1_coef], e[0])[burn_in:]
    x2 = lfilter([1.0], [1.0, -model.ar2_coef], e[1])[burn_in:]
    x3 = lfilter([1.0], [1.0, 0.0, -model.ar3_lag2_coef], e[2])[burn_in:]
    w1 = model.W1(x1)
    z = w1 * x1 + (1 - w1) * x2
    w2 = model.W2(z)
    return w2 * z + (1 - w2) * x3


def gen_garch(model: Garch11, n, rng, burn_in=DEFAULT_BURN_IN) -> np.ndarray:
    e = _innovations(rng, (n,), burn_in)
    y = np.empty(e.size)
    var = model.unconditional_variance
    prev_sq = var
    om, a, b = model.omega, model.a, model.b
    for t in range(e.size):
        var = om + a * prev_sq + b * var
        y[t] = np.sqrt(var) * e[t]
        prev_sq = y[t] * y[t]
    return y[burn_in:]


def simulate(model: SimModel, n, rng, burn_in=DEFAULT_BURN_IN) -> np.ndarray:
    """Draw one series of length ``n`` from any supported model."""
    n = int(n)
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    if isinstance(model, Ar2):
        return gen_ar2(model, n, rng, burn_in)
    if isinstance(model, HiddenPeriodicity):
        return gen_hidden(model, n, rng, burn_in)
    if isinstance(model, Mixture):
        return gen_mixture(n, rng, model, burn_in)
    if isinstance(model, Garch11):
        return gen_garch(model, n, rng, burn_in)
    raise TypeError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# Model records <-> plain dicts (for config files and manifests)
# ---------------------------------------------------------------------------

_MODEL_TYPES = {"ar2": Ar2, "hidden": HiddenPeriodicity, "mixture": Mixture, "garch": Garch11}


def model_to_dict(model: SimModel) -> dict:
    name = {v: k for k, v in _MODEL_TYPES.items()}[type(model)]
    out = {"model": name}
    for key, value in model.__dict__.items():
        out[key] = model_to_dict(value) if isinstance(value, Ar2) else (
            list(value) if isinstance(value, tuple) else value)
    return out


def model_from_dict(spec: dict) -> SimModel:
    spec = dict(spec)
    name = spec.pop("model")
    if name not in _MODEL_TYPES:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_MODEL_TYPES)}")
    if "carrier" in spec and isinstance(spec["carrier"], dict):
        carrier = dict(spec["carrier"])
        carrier.pop("model", None)
        spec["carrier"] = Ar2(**carrier)
    spec = {k: tuple(v) if isinstance(v, list) else v for k, v in spec.items()}
    return _MODEL_TYPES[name](**spec)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    replicates: int
    n: int
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.replicates < 1 or self.n < 1 or self.burn_in < 0:
            raise ValueError("need replicates >= 1, n >= 1, burn_in >= 0")


@dataclass
class McSummary:
    """Per-replicate results stacked along axis 0, keyed by pipeline output name."""
    config: McConfig
    values: Dict[str, np.ndarray]

    def mean(self, key="value"):
        return self.values[key].mean(axis=0)

    def rate(self, key="value"):
        """Fraction of replicates where a boolean output is true, with its
        binomial standard error."""
        p = float(np.mean(self.values[key]))
        return p, float(np.sqrt(p * (1 - p) / self.config.replicates))


def monte_carlo(model: SimModel, cfg: McConfig, pipeline: Callable, workers=1) -> McSummary:
    """Run ``pipeline(series)`` on ``cfg.replicates`` independent draws.

    ``pipeline`` returns a scalar, an array or a dict of those. Replicate ``i``
    always sees the stream ``replicate_rng(cfg.seed, i)``; results are stacked
    in index order, so any ``workers`` count yields identical output.
    """
    def run(i):
        try:
            y = simulate(model, cfg.n, replicate_rng(cfg.seed, i), cfg.burn_in)
            out = pipeline(y)
        except Exception as err:  # noqa: BLE001 - re-raised with the replicate index
            raise ReplicateError(i, err) from err
        return out if isinstance(out, dict) else {"value": out}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(cfg.replicates)))
    else:
        results = [run(i) for i in range(cfg.replicates)]
    keys = results[0].keys()
    values = {k: np.stack([np.asarray(r[k]) for r in results]) for k in keys}
    return McSummary(cfg, values)
