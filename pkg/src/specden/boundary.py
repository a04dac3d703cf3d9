"""Local even-polynomial estimation of the spectral density at the boundary frequencies 0 and pi.

The periodogram (or log-periodogram) ordinates nearest a boundary point
``theta`` are regressed on ``1, (theta - w)^2, ..., (theta - w)^(2(d-1))``;
the fitted intercept estimates ``f(theta)``. Fits can be extended to a
whole-axis estimate and blended with an interior lag-window estimate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Autocovariance, SeriesError, as_series, fourier_grid, periodogram, sample_autocovariance
from .lagwindow import (BandwidthWarning, LagWindow, SpectralEstimate, empirical_rule_bandwidth,
                        lw_spectral_estimate)

EULER_OFFSET = 0.57721
LOG_FLOOR = 1e-300
KAPPA_MAX_DELTA = 0.25

KERNELS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "uniform": lambda u: np.ones_like(u),
    "bartlett": lambda u: 1.0 - u,
    "epanechnikov": lambda u: 1.0 - u**2,
}


class BoundaryFitError(ValueError):
    pass


def _theta(theta: float) -> float:
    theta = abs(float(theta))
    if theta == 0.0:
        return 0.0
    if abs(theta - math.pi) < 1e-12:
        return math.pi
    raise ValueError(f"boundary point must be 0 or pi, got {theta}")


@dataclass(frozen=True)
class BoundaryFitConfig:
    """Settings for one boundary regression.

    ``degree`` counts even powers: 1 is local constant, 2 local quadratic,
    3 local quartic. ``kernel`` is a name from :data:`KERNELS` or a callable
    ``K`` on ``[0, 1]``.
    """

    theta: float = 0.0
    delta: float = 0.1
    degree: int = 2
    kernel: str | Callable = "uniform"
    target: str = "periodogram"

    def __post_init__(self):
        object.__setattr__(self, "theta", _theta(self.theta))
        if not 0 < self.delta <= 0.5:
            raise ValueError(f"delta must lie in (0, 0.5], got {self.delta}")
        if self.degree not in (1, 2, 3):
            raise ValueError(f"degree must be 1, 2 or 3, got {self.degree}")
        if self.target not in ("periodogram", "log"):
            raise ValueError(f"target must be 'periodogram' or 'log', got {self.target!r}")
        if isinstance(self.kernel, str) and self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")

    @property
    def kernel_fn(self) -> Callable:
        return KERNELS[self.kernel] if isinstance(self.kernel, str) else self.kernel

    def m(self, n: int) -> int:
        return int(math.floor(self.delta * n + 1e-9))


@dataclass(frozen=True)
class BoundaryFitResult:
    theta: float
    delta: float
    degree: int
    target: str
    coefficients: np.ndarray
    f_at_theta: float
    m_used: int
    design_condition: float
    frequencies_used: np.ndarray
    rss: float
    n: int
    flags: tuple[str, ...] = ()

    def curve(self, w) -> np.ndarray:
        """The fitted even polynomial (exponentiated for the log target) at ``w``."""
        d2 = (self.theta - np.asarray(w, dtype=float)) ** 2
        poly = sum(c * d2**k for k, c in enumerate(self.coefficients))
        return np.exp(poly) if self.target == "log" else poly


def boundary_design(config: BoundaryFitConfig, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fourier indices, frequencies and design matrix of the boundary regression.

    At ``theta = 0`` the band is ``j = 1..m`` (``j = 0`` carries ``I(0) = 0``);
    at ``theta = pi`` it is the ``m`` largest indices of ``J_n``.
    """
    if n < 8:
        raise BoundaryFitError(f"boundary fits need n >= 8, got {n}")
    m = config.m(n)
    if m < 2 * config.degree:
        raise BoundaryFitError(
            f"bandwidth too small for degree: m={m} < {2 * config.degree} (delta={config.delta}, n={n})")
    half = n // 2
    if config.theta == 0.0:
        j = np.arange(1, m + 1)
    else:
        j = np.arange(half - m + 1, half + 1)
    w = 2.0 * np.pi * j / n
    d2 = (config.theta - w) ** 2
    X = np.column_stack([d2**k for k in range(config.degree)])
    return j, w, X


def _weights(config: BoundaryFitConfig, w: np.ndarray) -> np.ndarray:
    h = 2.0 * np.pi * config.delta
    u = np.abs(config.theta - w) / h
    return np.asarray(config.kernel_fn(u), dtype=float) / h


def _solve(X: np.ndarray, y: np.ndarray, weights: np.ndarray | None, h: float):
    """Weighted least squares in the rescaled variable ``(theta - w)/h``.

    Returns coefficients on the original powers, weighted RSS and the
    condition number of the rescaled weighted design.
    """
    scale = h ** (2.0 * np.arange(X.shape[1]))
    Xs = X / scale
    if weights is None:
        A, b = Xs, y
    else:
        sw = np.sqrt(weights)
        A, b = Xs * sw[:, None], y * sw
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e12:
        raise BoundaryFitError(f"singular boundary design (condition number {cond:.3g})")
    beta, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = b - A @ beta
    return beta / scale, float(resid @ resid), cond


def _fit(I, config: BoundaryFitConfig, weighted: bool) -> BoundaryFitResult:
    I = np.asarray(I, dtype=float)
    n = I.size
    grid = fourier_grid(n)
    j, w, X = boundary_design(config, n)
    y = I[grid.position(j)]
    flags = []
    weights = None
    if weighted:
        weights = _weights(config, w)
        if np.any(weights < 0):
            raise BoundaryFitError("kernel weights must be non-negative")
        if np.count_nonzero(weights > 0) < config.degree:
            raise BoundaryFitError("kernel weights vanish on all but a degenerate set of ordinates")
    if config.target == "log":
        keep = y > LOG_FLOOR
        if not keep.all():
            flags.append(f"dropped {np.count_nonzero(~keep)} zero periodogram ordinates")
            if np.count_nonzero(keep) < 2 * config.degree:
                raise BoundaryFitError("too few positive periodogram ordinates for the log fit")
            j, w, X, y = j[keep], w[keep], X[keep], y[keep]
            if weights is not None:
                weights = weights[keep]
        y = np.log(y) - EULER_OFFSET
    coef, rss, cond = _solve(X, y, weights, 2.0 * np.pi * config.delta)
    f0 = math.exp(coef[0]) if config.target == "log" else float(coef[0])
    return BoundaryFitResult(theta=config.theta, delta=config.delta, degree=config.degree,
                             target=config.target, coefficients=coef, f_at_theta=f0,
                             m_used=int(j.size), design_condition=cond, frequencies_used=w,
                             rss=rss, n=n, flags=tuple(flags))


def fit_boundary_ols(I, config: BoundaryFitConfig) -> BoundaryFitResult:
    """Ordinary least squares boundary fit of the periodogram ``I`` (ordered by ``J_n``)."""
    return _fit(I, config, weighted=False)


def fit_boundary_wls(I, config: BoundaryFitConfig) -> BoundaryFitResult:
    """Kernel-weighted fit with weights ``K_delta(theta - w_j) = K(|theta - w_j|/h)/h``, ``h = 2 pi delta``."""
    return _fit(I, config, weighted=True)


def fit_boundary_log(I, config: BoundaryFitConfig) -> BoundaryFitResult:
    """Log-periodogram fit; returns ``exp`` of the intercept, always positive.

    Ordinates with ``I <= 1e-300`` are dropped and flagged.
    """
    if config.target != "log":
        config = BoundaryFitConfig(config.theta, config.delta, config.degree, config.kernel, "log")
    weighted = not (isinstance(config.kernel, str) and config.kernel == "uniform")
    return _fit(I, config, weighted=weighted)


# --------------------------------------------------------------------------
# Whole-axis constructions


def _extend(fit0: BoundaryFitResult, fit_pi: BoundaryFitResult, n: int, method: str) -> SpectralEstimate:
    if fit0.theta != 0.0 or fit_pi.theta != math.pi:
        raise ValueError("need one fit at theta=0 and one at theta=pi")
    if fit0.n != n or fit_pi.n != n:
        raise ValueError("fits were computed for a different sample size")
    half = n // 2
    # Band sizes come from delta: log fits may have dropped zero ordinates.
    m0 = int(math.floor(fit0.delta * n + 1e-9))
    m1 = int(math.floor(fit_pi.delta * n + 1e-9))
    if m0 + m1 > half:
        raise ValueError(f"delta too large: boundary bands overlap (m0={m0}, m_pi={m1}, [n/2]={half})")
    grid = fourier_grid(n)
    j = np.abs(grid.indices)
    w = 2.0 * np.pi * j / n
    vals = np.zeros(n)
    low = j <= m0
    high = j >= half - m1 + 1
    vals[low] = fit0.curve(w[low])
    vals[high] = fit_pi.curve(w[high])
    return SpectralEstimate(grid.frequencies, vals, method,
                            {"delta0": fit0.delta, "delta_pi": fit_pi.delta})


def extend_tilde_f(fit0: BoundaryFitResult, fit_pi: BoundaryFitResult, n: int) -> SpectralEstimate:
    """Local polynomial fits on the two boundary bands, zero in between, symmetric in ``w``."""
    return _extend(fit0, fit_pi, n, "local-poly")


def extend_bar_f(fit0: BoundaryFitResult, fit_pi: BoundaryFitResult, n: int) -> SpectralEstimate:
    """As :func:`extend_tilde_f` with exponentiated log-periodogram fits."""
    if fit0.target != "log" or fit_pi.target != "log":
        raise ValueError("extend_bar_f needs log-periodogram fits")
    return _extend(fit0, fit_pi, n, "log-periodogram")


def epsilon_floor(est: SpectralEstimate, epsilon: float, n: int) -> SpectralEstimate:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return SpectralEstimate(est.frequencies, np.maximum(est.values, epsilon / n),
                            est.method + "-eps", dict(est.bandwidth), est.flags)


def kappa_weight(w, delta: float):
    """Blending weight: 0 at the boundaries, rising linearly to 1 over a band of width ``2 pi delta``."""
    delta = min(float(delta), KAPPA_MAX_DELTA)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    a = np.abs(np.angle(np.exp(1j * np.asarray(w, dtype=float))))
    h = 2.0 * np.pi * delta
    out = np.clip(np.minimum(a / h, (np.pi - a) / h), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BlendedEstimate:
    estimate: SpectralEstimate
    interior: SpectralEstimate
    boundary: SpectralEstimate
    kappa: np.ndarray
    delta: float
    C: float
    gamma0: float
    flags: tuple[str, ...] = ()

    @property
    def values(self) -> np.ndarray:
        return self.estimate.values

    @property
    def frequencies(self) -> np.ndarray:
        return self.estimate.frequencies


def blended_estimate(interior: SpectralEstimate, tilde: SpectralEstimate, acf: Autocovariance,
                     delta: float) -> BlendedEstimate:
    """``[kappa f_interior + (1 - kappa) f_boundary] / C`` normalized to integrate to ``gamma(0)``.

    Both inputs must be positive-part (or floored) estimates on the full Fourier grid.
    """
    if not np.allclose(interior.frequencies, tilde.frequencies, rtol=0, atol=1e-12):
        raise ValueError("interior and boundary estimates are on different grids")
    flags = []
    if delta > KAPPA_MAX_DELTA:
        warnings.warn(f"delta={delta} exceeds {KAPPA_MAX_DELTA} for blending; clamped",
                      BandwidthWarning, stacklevel=2)
        flags.append("blend delta clamped to 0.25")
        delta = KAPPA_MAX_DELTA
    kappa = kappa_weight(interior.frequencies, delta)
    raw = kappa * interior.values + (1.0 - kappa) * tilde.values
    total = float(np.mean(raw))
    gamma0 = float(acf.gamma[0])
    if total <= 0 or gamma0 <= 0:
        raise ValueError("degenerate estimate: blended numerator integrates to zero")
    C = total / gamma0
    est = SpectralEstimate(interior.frequencies, raw / C, "blended",
                           {**interior.bandwidth, "delta": delta, "C": C}, tuple(flags))
    return BlendedEstimate(est, interior, tilde, kappa, delta, C, gamma0, tuple(flags))


# --------------------------------------------------------------------------
# Bandwidth selection


@dataclass(frozen=True)
class DeltaSelection:
    delta_star: float
    deltas: np.ndarray
    mse: np.ndarray
    variance: np.ndarray
    bias: np.ndarray


def delta_grid(n: int, size: int = 200, min_m: int = 4) -> np.ndarray:
    lo = min_m / n
    if lo > 0.5:
        raise BoundaryFitError(f"no feasible delta for n={n}")
    return np.geomspace(lo, 0.5, size)


def _band_moments(theta: float, pilot_vals: np.ndarray, n: int):
    """Cumulative band sums ordered by distance from ``theta``.

    ``pilot_vals`` holds the pilot at ``j = 0..[n/2]``.
    """
    half = n // 2
    j = np.arange(1, half + 1) if theta == 0.0 else np.arange(half, 0, -1)
    d2 = (theta - 2.0 * np.pi * j / n) ** 2
    f = pilot_vals[j]
    return {
        "c2": np.cumsum(d2), "c4": np.cumsum(d2**2),
        "F0": np.cumsum(f**2), "F2": np.cumsum(d2 * f**2), "F4": np.cumsum(d2**2 * f**2),
        "G0": np.cumsum(f), "G2": np.cumsum(d2 * f),
    }


def select_delta_star(acf: Autocovariance | None, theta: float, pilot: SpectralEstimate, n: int,
                      deltas: np.ndarray | None = None) -> DeltaSelection:
    """Minimize the plug-in MSE of the local quadratic OLS estimator over a delta grid.

    ``pilot`` supplies ``f`` at the Fourier frequencies (normally the
    flat-top estimate). The variance and bias use the finite-``m`` design
    moments ``c2, c4`` and pilot sums ``F_p, G_p``.
    """
    theta = _theta(theta)
    if deltas is None:
        deltas = delta_grid(n)
    deltas = np.asarray(deltas, dtype=float)
    half = n // 2
    pilot_vals = np.asarray(pilot.at(2.0 * np.pi * np.arange(half + 1) / n))
    f_theta = float(pilot.at(theta))
    sums = _band_moments(theta, pilot_vals, n)
    m = np.floor(deltas * n + 1e-9).astype(int)
    ok = (m >= 4) & (m <= half)
    if not ok.any():
        raise BoundaryFitError(f"no feasible delta for n={n}")
    deltas, m = deltas[ok], m[ok]
    avg = {k: v[m - 1] / m for k, v in sums.items()}
    c2, c4 = avg["c2"], avg["c4"]
    q = c4 - c2**2
    var = (c4**2 * avg["F0"] - 2 * c4 * c2 * avg["F2"] + c2**2 * avg["F4"]) / q**2 / (deltas * n)
    bias = (c4 * avg["G0"] - c2 * avg["G2"]) / q - f_theta
    mse = var + bias**2
    k = int(np.argmin(mse))
    return DeltaSelection(float(deltas[k]), deltas, mse, var, bias)


def flat_top_pilot(acf: Autocovariance, c: float = 0.5) -> SpectralEstimate:
    rule = empirical_rule_bandwidth(None, c=c, acf=acf)
    grid = fourier_grid(acf.n)
    vals = lw_spectral_estimate(acf, LagWindow("flat-top", c), rule.M, grid.frequencies)
    flags = ("empirical rule capped",) if rule.capped else ()
    return SpectralEstimate(grid.frequencies, vals, "flat-top", {"M": rule.M, "q": rule.q_hat}, flags)


def estimate_f_boundary(x, theta: float = 0.0, delta: float | str = "auto", degree: int = 2,
                        kernel: str | Callable = "uniform", target: str = "periodogram",
                        fix: str | None = None, epsilon: float = 1.0,
                        acf: Autocovariance | None = None) -> BoundaryFitResult:
    """End-to-end boundary estimate of ``f(theta)`` from a series.

    ``delta="auto"`` selects the bandwidth by the plug-in MSE rule (local
    quadratic only; the log target reuses the quadratic choice). ``fix`` is
    ``None``, ``"positive"`` or ``"epsilon"`` (floor at ``epsilon/n``).
    """
    x = as_series(x, min_length=8)
    n = x.size
    if acf is None:
        acf = sample_autocovariance(x)
    if acf.gamma[0] <= 0:
        raise SeriesError("zero variance series: periodogram vanishes identically")
    flags = []
    if isinstance(delta, str):
        if delta != "auto":
            raise ValueError(f"delta must be a number or 'auto', got {delta!r}")
        if degree != 2:
            raise ValueError("data-driven delta is only available for the local quadratic (degree=2)")
        pilot = flat_top_pilot(acf)
        delta = select_delta_star(acf, theta, pilot, n).delta_star
        flags.append(f"delta_star={delta:.6g}")
    config = BoundaryFitConfig(theta, float(delta), degree, kernel, target)
    I = periodogram(x)
    if target == "log":
        res = fit_boundary_log(I, config)
    elif isinstance(kernel, str) and kernel == "uniform":
        res = fit_boundary_ols(I, config)
    else:
        res = fit_boundary_wls(I, config)
    f0 = res.f_at_theta
    if fix == "positive":
        f0 = max(f0, 0.0)
    elif fix == "epsilon":
        if not epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        f0 = max(f0, epsilon / n)
    elif fix is not None:
        raise ValueError(f"unknown fix {fix!r}")
    if f0 != res.f_at_theta:
        flags.append(f"{fix} fix applied")
    return BoundaryFitResult(**{**res.__dict__, "f_at_theta": f0, "flags": res.flags + tuple(flags)})
