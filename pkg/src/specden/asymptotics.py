"""Leading-order bias and variance of lag-window and boundary-fit estimators.

These are used as oracles in tests and to cross-check the bandwidth selector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .boundary import KERNELS, BoundaryFitConfig, boundary_design
from .lagwindow import PARZEN_L2, LagWindow, eta_factor


def classical_var(f_at_w: float, w: float, window: LagWindow | float, M: float, n: int) -> float:
    """``eta(w) f(w)^2 (M/n) int lambda^2``; ``window`` may be the L2 integral itself."""
    if isinstance(window, LagWindow):
        if window.kind == "parzen":
            l2 = PARZEN_L2
        else:
            l2 = 2.0 * integrate.quad(lambda x: window(x) ** 2, 0.0, window.support, limit=200)[0]
    else:
        l2 = float(window)
    return float(eta_factor(w) * f_at_w**2 * (M / n) * l2)


@dataclass(frozen=True)
class KernelMoments:
    """``K_j = int_0^1 K(u) u^j du`` and ``Kt_j = int_0^1 K(u)^2 u^j du``."""

    K0: float
    K2: float
    K4: float
    K6: float
    Kt0: float
    Kt2: float
    Kt4: float

    @property
    def bias_constant(self) -> float:
        return (self.K4**2 - self.K6 * self.K2) / (self.K4 * self.K0 - self.K2**2)

    @property
    def variance_constant(self) -> float:
        num = self.K4**2 * self.Kt0 - 2 * self.K4 * self.K2 * self.Kt2 + self.K2**2 * self.Kt4
        return num / (self.K0 * self.K4 - self.K2**2) ** 2

    @property
    def trispectral_constant(self) -> float:
        num = (self.K4**2 * self.Kt0**2 - 2 * self.K4 * self.K2 * self.Kt2 * self.Kt0
               + self.K2**2 * self.Kt2**2)
        return num / (self.K0 * self.K4 - self.K2**2) ** 2


def _integrate01(fn: Callable[[float], float]) -> float:
    val, err = integrate.quad(fn, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    if not math.isfinite(val) or err > 1e-10:
        raise ValueError(f"kernel moment integral did not converge (estimate {val}, error {err})")
    return val


def kernel_moments(K: str | Callable[[float], float]) -> KernelMoments:
    if isinstance(K, str):
        K = KERNELS[K]

    def k(u):
        return float(np.asarray(K(np.asarray(u, dtype=float))))

    m = {j: _integrate01(lambda u, j=j: k(u) * u**j) for j in (0, 2, 4, 6)}
    mt = {j: _integrate01(lambda u, j=j: k(u) ** 2 * u**j) for j in (0, 2, 4)}
    if m[0] <= 0:
        raise ValueError("kernel must have positive mass on [0, 1]")
    return KernelMoments(m[0], m[2], m[4], m[6], mt[0], mt[2], mt[4])


def _grid_values(f, w: np.ndarray) -> np.ndarray:
    return np.asarray(f(w), dtype=float) if callable(f) else np.asarray(f, dtype=float)


def fixed_delta_bias_var(f, theta: float, delta: float, n: int, f_theta: float | None = None) -> tuple[float, float]:
    """Fixed-delta bias and variance of the local quadratic OLS estimator.

    ``f`` is the true (or pilot) density: a callable of ``w`` or its values
    at the band frequencies. ``f_theta`` defaults to ``f(theta)``.
    """
    config = BoundaryFitConfig(theta, delta, 2)
    _, w, X = boundary_design(config, n)
    fw = _grid_values(f, w)
    if f_theta is None:
        if not callable(f):
            raise ValueError("f_theta is required when f is given as values")
        f_theta = float(np.asarray(f(np.array([config.theta])))[0])
    d2 = X[:, 1]
    c2, c4 = d2.mean(), (d2**2).mean()
    q = c4 - c2**2
    if q <= 0:
        raise ValueError("degenerate design: c4 == c2^2")
    F0, F2, F4 = (fw**2).mean(), (d2 * fw**2).mean(), (d2**2 * fw**2).mean()
    G0, G2 = fw.mean(), (d2 * fw).mean()
    var = (c4**2 * F0 - 2 * c4 * c2 * F2 + c2**2 * F4) / q**2 / (delta * n)
    bias = (c4 * G0 - c2 * G2) / q - f_theta
    return float(bias), float(var)


@dataclass(frozen=True)
class TrueSpectrum:
    """A known density with its even derivatives at a boundary point."""

    f: Callable[[np.ndarray], np.ndarray]
    f_theta: float
    f2_theta: float
    f4_theta: float
    kurtosis: float = 3.0

    def trispectrum_at_boundary(self) -> float:
        """``F(-theta, theta, -theta)`` for a linear process: ``(kurtosis - 3) f(theta)^2``."""
        return (self.kurtosis - 3.0) * self.f_theta**2


def small_delta_bias_var(spec: TrueSpectrum, theta: float, delta: float, n: int,
                    K: str | Callable = "uniform", trispectrum: float | None = None) -> tuple[float, float]:
    """Small-delta leading bias and variance of the kernel-weighted estimator."""
    mom = kernel_moments(K)
    if mom.K0 * mom.K4 - mom.K2**2 == 0:
        raise ValueError("degenerate kernel: K0 K4 == K2^2")
    h = 2.0 * math.pi * delta
    # Intercept of the even-quadratic fit to the quartic Taylor term; bias_constant is negative.
    bias = (spec.f4_theta / 24.0) * h**4 * mom.bias_constant
    F = spec.trispectrum_at_boundary() if trispectrum is None else trispectrum
    var = spec.f_theta**2 * mom.variance_constant / (delta * n) + F * mom.trispectral_constant / n
    return float(bias), float(var)


def linear_process_trispectral_term(spectral_mean_gf: float, kurtosis: float) -> float:
    return (kurtosis - 3.0) * spectral_mean_gf**2


def ols_weight(theta: float, delta: float, w: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Limit weighting function of the OLS fit evaluated at ``w`` (default ``theta``).

    Supported on ``[0, pi]`` within ``2 pi delta`` of ``theta``; zero elsewhere.
    """
    theta = abs(theta)
    w = theta if w is None else w
    h = 2.0 * math.pi * delta
    Q = np.array([[1.0, h**2 / 3.0], [h**2 / 3.0, h**4 / 5.0]])
    row = np.linalg.solve(Q, [1.0, (theta - w) ** 2])  # Q symmetric

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        inside = (np.abs(theta - lam) <= h) & (lam >= 0) & (lam <= math.pi)
        return np.where(inside, (row[0] + row[1] * (theta - lam) ** 2) / delta, 0.0)

    return g


def wls_weight(theta: float, delta: float, K: str | Callable = "uniform",
               w: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    theta = abs(theta)
    w = theta if w is None else w
    Kf = KERNELS[K] if isinstance(K, str) else K
    mom = kernel_moments(K)
    h = 2.0 * math.pi * delta
    Q = np.array([[mom.K0 / h, h * mom.K2], [h * mom.K2, h**3 * mom.K4]])
    row = np.linalg.solve(Q, [1.0, (theta - w) ** 2])

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        u = np.abs(theta - lam) / h
        inside = (u <= 1) & (lam >= 0) & (lam <= math.pi)
        kd = np.where(inside, np.asarray(Kf(np.minimum(u, 1.0)), dtype=float) / h, 0.0)
        return (row[0] + row[1] * (theta - lam) ** 2) * kd / delta

    return g


def spectral_mean(g: Callable, h: Callable, points=None) -> float:
    """``(2 pi)^-1 int_{-pi}^{pi} g(l) h(l) dl`` by adaptive quadrature."""
    val, _ = integrate.quad(lambda lam: float(g(lam) * h(lam)), -math.pi, math.pi,
                            points=points, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val / (2.0 * math.pi)
