"""Inference on the mean using estimates of the long-run variance f(0)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from .boundary import estimate_f_boundary, flat_top_pilot, select_delta_star
from .core import SeriesError, as_series, sample_autocovariance
from .lagwindow import (FLAT_TOP, PARZEN, ar_fit_aic, ar_spectral_density, empirical_rule_bandwidth,
                        lw_spectral_estimate, parzen_plugin_bandwidth)


class NonPositiveVariance(ValueError):
    pass


@dataclass(frozen=True)
class F0Estimate:
    value: float
    method: str
    details: dict = field(default_factory=dict)


def _f0_parzen(x):
    acf = sample_autocovariance(x)
    bw = parzen_plugin_bandwidth(None, 0.0, acf=acf)
    return lw_spectral_estimate(acf, PARZEN, bw.M, 0.0), {"M": bw.M, "fallback": bw.fallback}


def _f0_flat_top(x):
    acf = sample_autocovariance(x)
    rule = empirical_rule_bandwidth(None, acf=acf)
    return max(lw_spectral_estimate(acf, FLAT_TOP, rule.M, 0.0), 0.0), {"M": rule.M, "q": rule.q_hat}


def _delta_star(x):
    acf = sample_autocovariance(x)
    return select_delta_star(acf, 0.0, flat_top_pilot(acf), x.size).delta_star, acf


def _f0_local_quad(x):
    delta, acf = _delta_star(x)
    return estimate_f_boundary(x, 0.0, delta, acf=acf).f_at_theta, {"delta": delta}


def _f0_local_quad_eps(x, epsilon: float = 1.0):
    delta, acf = _delta_star(x)
    # epsilon is in units of the sample variance so the floor is scale equivariant.
    floor_eps = epsilon * float(acf.gamma[0])
    fit = estimate_f_boundary(x, 0.0, delta, fix="epsilon", epsilon=floor_eps, acf=acf)
    return fit.f_at_theta, {"delta": delta, "epsilon": floor_eps}


def _f0_log(x):
    delta, acf = _delta_star(x)
    return estimate_f_boundary(x, 0.0, delta, target="log", acf=acf).f_at_theta, {"delta": delta}


def _f0_ar(x):
    fit = ar_fit_aic(x)
    return ar_spectral_density(fit.coefficients, fit.sigma2, 0.0), {"p": fit.order}


F0_METHODS: dict[str, Callable] = {
    "parzen": _f0_parzen,
    "flat-top": _f0_flat_top,
    "local-quad": _f0_local_quad,
    "local-quad-eps": _f0_local_quad_eps,
    "log-periodogram": _f0_log,
    "ar-ols": _f0_ar,
}
TABLE_METHODS = ("parzen", "flat-top", "local-quad", "log-periodogram", "ar-ols")
DEFAULT_F0 = "local-quad-eps"


def estimate_f0(x, method: str = DEFAULT_F0) -> F0Estimate:
    """Long-run variance estimate; raises if it is not strictly positive."""
    x = as_series(x, min_length=8)
    try:
        fn = F0_METHODS[method]
    except KeyError:
        raise ValueError(f"unknown f(0) method {method!r}; choose from {sorted(F0_METHODS)}") from None
    value, details = fn(x)
    if not value > 0:
        raise NonPositiveVariance(
            f"nonpositive long-run variance ({method} gave {value:.4g}); use a positive variant")
    return F0Estimate(float(value), method, details)


def _p_value(stat: float, alternative: str) -> float:
    if alternative == "greater":
        return float(norm.sf(stat))
    if alternative == "less":
        return float(norm.cdf(stat))
    if alternative == "two-sided":
        return float(min(1.0, 2.0 * norm.sf(abs(stat))))
    raise ValueError(f"alternative must be 'greater', 'less' or 'two-sided', got {alternative!r}")


@dataclass(frozen=True)
class MeanTest:
    statistic: float
    mu0: float
    alternative: str
    p_value: float
    f0_estimate: float
    method: str
    mean: float
    n: int
    details: dict = field(default_factory=dict)


def mean_t_test(x, mu0: float = 0.0, alternative: str = "two-sided", f0_method: str = DEFAULT_F0,
                f0: F0Estimate | None = None) -> MeanTest:
    """``sqrt(n) (xbar - mu0) / sqrt(f(0))`` with standard normal p-values."""
    x = as_series(x, min_length=8)
    if f0 is None:
        f0 = estimate_f0(x, f0_method)
    n = x.size
    xbar = float(x.mean())
    stat = math.sqrt(n) * (xbar - mu0) / math.sqrt(f0.value)
    return MeanTest(stat, mu0, alternative, _p_value(stat, alternative), f0.value, f0.method, xbar, n,
                    dict(f0.details))


def mean_confidence_interval(x, level: float = 0.95, f0_method: str = DEFAULT_F0,
                             f0: F0Estimate | None = None, scale: float = 1.0) -> tuple[float, float]:
    """``xbar +- z sqrt(f(0)/n)``, multiplied by ``scale`` (e.g. 4 to annualize quarterly rates)."""
    if not 0 <= level < 1:
        raise ValueError(f"level must be in [0, 1), got {level}")
    x = as_series(x, min_length=8)
    if f0 is None:
        f0 = estimate_f0(x, f0_method)
    half = norm.ppf(0.5 + level / 2) * math.sqrt(f0.value / x.size)
    xbar = float(x.mean())
    return scale * (xbar - half), scale * (xbar + half)


@dataclass(frozen=True)
class ChangePointTest:
    t_star: int
    m_dep: int
    n1: int
    n2: int
    mean1: float
    mean2: float
    statistic: float
    p_value: float
    f0_estimate: float
    method: str
    alternative: str = "less"
    details: dict = field(default_factory=dict)


def changepoint_samples(n: int, t_star: int, m_dep: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero-based index arrays of the two sub-samples around ``t_star`` (1-based).

    The first ends at ``t_star - ceil(m/2)``, the second starts at
    ``t_star + max(ceil(m/2), 1)``; ``t_star = 70, m = 2`` gives times 1..69 and 71..n.
    """
    if m_dep < 0:
        raise ValueError(f"dependence order must be non-negative, got {m_dep}")
    gap = math.ceil(m_dep / 2)
    last1 = t_star - gap
    first2 = t_star + max(gap, 1)
    idx1 = np.arange(0, max(last1, 0))
    idx2 = np.arange(first2 - 1, n)
    if idx1.size < 8 or idx2.size < 8:
        raise SeriesError(f"sub-samples too small: n1={idx1.size}, n2={idx2.size} (need >= 8 each)")
    return idx1, idx2


def changepoint_test(x, t_star: int, m_dep: int, f0_method: str = DEFAULT_F0,
                     alternative: str = "less") -> ChangePointTest:
    """Two-sample test of equal means before and after ``t_star`` for an m-dependent series.

    ``f(0)`` is estimated on the whole sample after removing the two-segment
    mean (segment means of the two sub-samples, switching after ``t_star``).
    """
    x = as_series(x, min_length=16)
    n = x.size
    idx1, idx2 = changepoint_samples(n, t_star, m_dep)
    mean1, mean2 = float(x[idx1].mean()), float(x[idx2].mean())
    mu = np.where(np.arange(1, n + 1) <= t_star, mean1, mean2)
    f0 = estimate_f0(x - mu, f0_method)
    n1, n2 = idx1.size, idx2.size
    stat = (mean1 - mean2) / math.sqrt((1.0 / n1 + 1.0 / n2) * f0.value)
    return ChangePointTest(t_star, m_dep, n1, n2, mean1, mean2, stat, _p_value(stat, alternative),
                           f0.value, f0.method, alternative, dict(f0.details))
