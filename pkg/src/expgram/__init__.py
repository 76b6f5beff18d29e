"""Expectile periodograms: spectral analysis across the whole range of
asymmetric least-squares levels, with classical and quantile counterparts."""

__version__ = "0.1.0"

from .classical import (asecp, level_crossing_process, ordinary_periodogram,
                        quantile_fit, quantile_periodogram)
from .core import (DEFAULT_LEVELS, FrequencyGrid, PeriodogramMatrix, TimeSeries,
                   TrigFit, edft, expectile_loss, expectile_loss_derivative,
                   expectile_periodogram, fourier_grid, normalize, scalar_expectile,
                   trig_expectile_fit)
from .exceptions import *  # noqa: F401,F403
from .sim import (Ar2, Garch11, HiddenPeriodicity, McConfig, Mixture, monte_carlo,
                  replicate_rng, simulate)
from .spectrum import (SmoothingKernel, daniell, expectile_spectrum, kl_divergence,
                       level_variance, modified_daniell, mse, roughness, smooth,
                       smooth_matrix)
from .stats import chi2_limit_check, fisher_statistic, fisher_tail, fisher_test
