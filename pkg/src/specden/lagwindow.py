"""Lag-window spectral estimators, flat-top bandwidth rules and the AR-AIC benchmark."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import Autocovariance, SeriesError, as_series, fourier_grid, sample_autocovariance

PARZEN_L2 = 151.0 / 280.0  # integral of the squared Parzen window, 0.539285...
PARZEN_CURVATURE = 6.0  # 1 - lambda(x) ~ 6 x^2 near the origin


class BandwidthWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LagWindow:
    """A lag window ``lambda(x)``.

    ``kind`` is one of ``"parzen"``, ``"flat-top"`` (trapezoid with flat part
    ``|x| <= c``), ``"truncated"`` or ``"custom"``. A custom window is given by
    a tabulation ``(grid, values)`` on ``x >= 0`` and is linearly interpolated,
    zero beyond the last grid point.
    """

    kind: str = "flat-top"
    c: float = 0.5
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("parzen", "flat-top", "truncated", "custom"):
            raise ValueError(f"unknown lag window {self.kind!r}")
        if self.kind == "flat-top" and not 0 < self.c < 1:
            raise ValueError(f"flat-top shape parameter must be in (0, 1), got {self.c}")
        if self.kind == "custom":
            if self.table is None:
                raise ValueError("custom lag window needs a (grid, values) table")
            grid, vals = (np.asarray(a, dtype=float) for a in self.table)
            if grid[0] != 0 or vals[0] != 1:
                raise ValueError("custom lag window must satisfy lambda(0) = 1")

    @property
    def order(self) -> float:
        return {"parzen": 2, "flat-top": math.inf, "truncated": math.inf}.get(self.kind, math.nan)

    @property
    def support(self) -> float:
        """Half-width of the support of lambda."""
        if self.kind == "custom":
            return float(self.table[0][-1])
        return 1.0

    def __call__(self, x):
        a = np.abs(np.asarray(x, dtype=float))
        if self.kind == "parzen":
            out = np.where(a <= 0.5, 1.0 - 6.0 * a**2 + 6.0 * a**3,
                           np.where(a <= 1.0, 2.0 * (1.0 - a) ** 3, 0.0))
        elif self.kind == "flat-top":
            # Trapezoid: 1 on [0, c], linear down to 0 at 1 (= min{1, 2(1-|x|)}^+ when c = 1/2).
            out = np.clip((1.0 - a) / (1.0 - self.c), 0.0, 1.0)
        elif self.kind == "truncated":
            out = (a <= 1.0).astype(float)
        else:
            grid, vals = self.table
            out = np.interp(a, grid, vals, right=0.0)
        return float(out) if out.ndim == 0 else out


PARZEN = LagWindow("parzen")
FLAT_TOP = LagWindow("flat-top", 0.5)


def lag_window_value(window: LagWindow, x):
    return window(x)


@dataclass(frozen=True)
class SpectralEstimate:
    """Density values on a set of frequencies in [-pi, pi]."""

    frequencies: np.ndarray
    values: np.ndarray
    method: str
    bandwidth: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def at(self, w) -> np.ndarray | float:
        """Value at the tabulated frequency nearest to ``w`` (after folding by symmetry)."""
        w = np.abs(np.angle(np.exp(1j * np.asarray(w, dtype=float))))
        idx = np.abs(np.abs(self.frequencies)[None, :] - np.atleast_1d(w)[:, None]).argmin(axis=1)
        out = self.values[idx]
        return float(out[0]) if np.ndim(w) == 0 else out


def positive_part(est: SpectralEstimate) -> SpectralEstimate:
    return SpectralEstimate(est.frequencies, np.maximum(est.values, 0.0), est.method + "+",
                            dict(est.bandwidth), est.flags)


def _lags(acf: Autocovariance, window: LagWindow, M: float) -> np.ndarray:
    smax = min(acf.n - 1, int(math.floor(window.support * M)))
    return np.arange(1, smax + 1)


def lw_spectral_estimate(acf: Autocovariance, window: LagWindow, M: float, w, derivative: int = 0):
    """Lag-window estimate ``sum_s exp(i w s) lambda(s/M) gamma(s)``.

    ``derivative=2`` gives the second frequency derivative
    ``-sum_s s^2 lambda(s/M) gamma(s) exp(i w s)``.
    """
    if not M > 0:
        raise ValueError(f"bandwidth M must be positive, got {M}")
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    s = _lags(acf, window, M)
    weights = window(s / M) * acf.gamma[s]
    if derivative == 0:
        out = acf.gamma[0] + 2.0 * np.cos(np.outer(w_arr, s)) @ weights
    elif derivative == 2:
        out = -2.0 * np.cos(np.outer(w_arr, s)) @ (s.astype(float) ** 2 * weights)
    else:
        raise ValueError("derivative must be 0 or 2")
    return float(out[0]) if np.ndim(w) == 0 else out


def spectral_kernel(window: LagWindow, M: float, n: int) -> np.ndarray:
    """``Lambda_M(w_j)`` at every Fourier frequency, summing lags over ``J_n``."""
    grid = fourier_grid(n)
    s = grid.indices
    lam = window(s / M)
    # Periodic (length-n) kernel: the Riemann sum is exact for trigonometric
    # polynomials of degree < n/2 and M = n, lambda = 1 reproduces I(w).
    return np.real(np.exp(1j * np.outer(grid.frequencies, s)) @ lam)


def riemann_kernel_estimate(I: np.ndarray, window: LagWindow, M: float, w: float) -> float:
    """Periodogram-smoothing form ``n^-1 sum_j Lambda_M(w_j) I(w + w_j)``.

    ``I`` is ordered by ``fourier_grid(n).indices``; ``w`` must be a Fourier frequency.
    """
    I = np.asarray(I, dtype=float)
    n = I.size
    grid = fourier_grid(n)
    j0 = w * n / (2.0 * np.pi)
    if abs(j0 - round(j0)) > 1e-8:
        raise ValueError(f"w={w} is not a Fourier frequency for n={n}; snap it first")
    j0 = int(round(j0))
    kern = spectral_kernel(window, M, n)
    shifted = I[np.mod(grid.indices + j0 - grid.indices[0], n)]
    return float(kern @ shifted / n)


def lag_window_estimate(x, window: LagWindow, M: float, frequencies=None) -> SpectralEstimate:
    x = as_series(x, min_length=4)
    acf = sample_autocovariance(x)
    if frequencies is None:
        frequencies = fourier_grid(x.size).frequencies
    vals = lw_spectral_estimate(acf, window, M, np.asarray(frequencies))
    return SpectralEstimate(np.asarray(frequencies, dtype=float), vals, window.kind, {"M": M})


# --------------------------------------------------------------------------
# Bandwidth choice


@dataclass(frozen=True)
class EmpiricalRuleResult:
    q_hat: int
    M: float
    threshold: float
    window_length: int
    capped: bool = False


def empirical_rule_threshold(n: int) -> float:
    return 1.96 * math.sqrt(math.log10(n) / n)


def empirical_rule_bandwidth(x, c: float = 0.5, acf: Autocovariance | None = None) -> EmpiricalRuleResult:
    """Flat-top bandwidth from the autocorrelation threshold rule.

    ``q_hat`` is the smallest positive integer such that ``|rho(q_hat + k)|``
    stays under ``1.96 sqrt(log10(n)/n)`` for ``k = 1..K_n`` with
    ``K_n = ceil(1 + 3 sqrt(log10 n))``. Returns ``M = q_hat / c``.
    """
    if acf is None:
        acf = sample_autocovariance(as_series(x, min_length=8))
    n = acf.n
    if n < 8:
        raise SeriesError(f"empirical rule needs n >= 8, got {n}")
    rho = np.abs(acf.rho)
    thr = empirical_rule_threshold(n)
    K = int(math.ceil(1.0 + 3.0 * math.sqrt(math.log10(n))))
    cap = max(1, n // 4)
    # Pad with zeros: lags >= n are zero by definition.
    big = np.concatenate([rho, np.zeros(cap + K + 1)]) >= thr
    for q in range(1, cap + 1):
        if not big[q + 1:q + K + 1].any():
            return EmpiricalRuleResult(q, q / c, thr, K)
    warnings.warn(f"empirical rule found no cutoff below n/4; using q={cap}", BandwidthWarning,
                  stacklevel=2)
    return EmpiricalRuleResult(cap, cap / c, thr, K, capped=True)


def eta_factor(w) -> np.ndarray | float:
    """2 at integer multiples of pi, 1 elsewhere."""
    r = np.abs(np.remainder(np.asarray(w, dtype=float) + np.pi / 2, np.pi) - np.pi / 2)
    out = np.where(r < 1e-12, 2.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PluginBandwidth:
    M: float
    f_pilot: float
    f2_pilot: float
    pilot_M: float
    fallback: bool = False


def parzen_plugin_bandwidth(x, theta: float = 0.0, acf: Autocovariance | None = None,
                            pilot: EmpiricalRuleResult | None = None) -> PluginBandwidth:
    """MSE-optimal Parzen bandwidth with flat-top pilot estimates of f and f''.

    ``M* = [4 c^2 f''(theta)^2 n / (eta(theta) f(theta)^2 int lambda^2)]^(1/5)``
    with ``c = 6`` the Parzen curvature constant.
    """
    if acf is None:
        acf = sample_autocovariance(as_series(x, min_length=8))
    n = acf.n
    if pilot is None:
        pilot = empirical_rule_bandwidth(None, acf=acf)
    f = lw_spectral_estimate(acf, FLAT_TOP, pilot.M, theta)
    f2 = lw_spectral_estimate(acf, FLAT_TOP, pilot.M, theta, derivative=2)
    if f2 == 0.0 or f == 0.0:
        return PluginBandwidth(n ** 0.2, f, f2, pilot.M, fallback=True)
    num = 4.0 * PARZEN_CURVATURE**2 * f2**2 * n
    den = eta_factor(theta) * f**2 * PARZEN_L2
    return PluginBandwidth((num / den) ** 0.2, f, f2, pilot.M)


# --------------------------------------------------------------------------
# Autoregressive benchmark


@dataclass(frozen=True)
class ARFit:
    order: int
    coefficients: np.ndarray
    sigma2: float
    aic: np.ndarray
    skipped: tuple[int, ...] = ()


def ar_fit_aic(x, p_max: int | None = None) -> ARFit:
    """Fit AR(p) by OLS for p = 0..p_max on a common sample and pick p by AIC.

    Data are centered and an intercept is included in every regression.
    ``AIC(p) = n_eff log(sigma2_p) + 2p`` with ``n_eff = n - p_max``.
    """
    x = as_series(x, min_length=4)
    n = x.size
    if p_max is None:
        p_max = min(int(math.floor(10.0 * math.log10(n))), (n - 1) // 2)
    if not 0 <= p_max < n / 2:
        raise ValueError(f"p_max must satisfy 0 <= p_max < n/2, got {p_max}")
    xc = x - x.mean()
    n_eff = n - p_max
    y = xc[p_max:]
    lagged = np.column_stack([xc[p_max - k:n - k] for k in range(1, p_max + 1)]) if p_max else \
        np.empty((n_eff, 0))
    aic = np.full(p_max + 1, np.inf)
    fits = {}
    skipped = []
    for p in range(p_max + 1):
        X = np.column_stack([np.ones(n_eff), lagged[:, :p]])
        if np.linalg.cond(X) > 1e12:
            skipped.append(p)
            continue
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ beta
        s2 = float(resid @ resid) / n_eff
        if s2 <= 0:
            skipped.append(p)
            continue
        aic[p] = n_eff * math.log(s2) + 2 * p
        fits[p] = (beta[1:], s2)
    if not fits:
        raise np.linalg.LinAlgError("every AR order had a singular design")
    p_hat = int(np.argmin(aic))
    phi, s2 = fits[p_hat]
    return ARFit(p_hat, np.asarray(phi), s2, aic, tuple(skipped))


def ar_spectral_density(coefficients, sigma2: float, w):
    """``sigma2 / |1 - sum_k phi_k exp(-i k w)|^2``."""
    phi = np.atleast_1d(np.asarray(coefficients, dtype=float))
    if phi.size:
        # Roots of 1 - phi_1 z - ... - phi_p z^p.
        roots = np.roots(np.concatenate([[1.0], -phi])[::-1])
        if np.any(np.abs(np.abs(roots) - 1.0) < 1e-8):
            raise ValueError("AR spectrum unstable: characteristic root on the unit circle")
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    k = np.arange(1, phi.size + 1)
    transfer = 1.0 - np.exp(-1j * np.outer(w_arr, k)) @ phi
    out = sigma2 / np.abs(transfer) ** 2
    return float(out[0]) if np.ndim(w) == 0 else out
