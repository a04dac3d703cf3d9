"""Boundary-corrected spectral density estimation at frequencies 0 and pi."""

import types

__version__ = "0.1.0"

from .asymptotics import (KernelMoments, TrueSpectrum, classical_var, kernel_moments, ols_weight,
                          fixed_delta_bias_var, small_delta_bias_var, spectral_mean, wls_weight)
from .boundary import (BlendedEstimate, BoundaryFitConfig, BoundaryFitError, BoundaryFitResult,
                       DeltaSelection, blended_estimate, epsilon_floor, estimate_f_boundary, extend_bar_f,
                       extend_tilde_f, fit_boundary_log, fit_boundary_ols, fit_boundary_wls, kappa_weight,
                       select_delta_star)
from .core import (Autocovariance, FourierGrid, SeriesError, detrend, fourier_grid, periodogram,
                   read_series_csv, sample_autocovariance, write_series_csv)
from .inference import (NonPositiveVariance, changepoint_test, estimate_f0, mean_confidence_interval,
                        mean_t_test)
from .lagwindow import (FLAT_TOP, PARZEN, LagWindow, SpectralEstimate, ar_fit_aic, ar_spectral_density,
                        empirical_rule_bandwidth, lag_window_estimate, lw_spectral_estimate,
                        parzen_plugin_bandwidth)
from .simulate import (ArmaSpec, MonteCarloAbort, arma_simulate, arma_true_spectrum, monte_carlo_report,
                       rmse_vs_delta_curve)

__all__ = [name for name, obj in globals().items()
           if not name.startswith("_") and not isinstance(obj, types.ModuleType)]
