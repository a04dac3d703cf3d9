import math

import numpy as np
import pytest

from specden.asymptotics import (TrueSpectrum, classical_var, kernel_moments, ols_weight, fixed_delta_bias_var,
                                 small_delta_bias_var, linear_process_trispectral_term, spectral_mean, wls_weight)
from specden.boundary import BoundaryFitConfig, boundary_design
from specden.lagwindow import PARZEN
from specden.simulate import ArmaSpec, arma_true_spectrum


def brute_force_bias_var(f, theta, delta, n):
    """Bias and variance of the OLS intercept with independent ordinates of variance f^2."""
    _, w, X = boundary_design(BoundaryFitConfig(theta, delta, 2), n)
    a = np.linalg.solve(X.T @ X, X.T)[0]
    fw = f(w)
    return float(a @ fw - f(np.array([theta]))[0]), float(a**2 @ fw**2)


def test_classical_var_parzen():
    assert classical_var(1.0, 0.0, PARZEN, 20, 800) == pytest.approx(0.02696, abs=5e-6)
    assert classical_var(1.0, 1.0, PARZEN, 20, 800) == pytest.approx(20 / 800 * 151 / 280, rel=1e-14)


def test_uniform_moments():
    m = kernel_moments("uniform")
    np.testing.assert_allclose([m.K0, m.K2, m.K4, m.K6], [1, 1 / 3, 1 / 5, 1 / 7], atol=1e-14)
    np.testing.assert_allclose([m.Kt0, m.Kt2, m.Kt4], [1, 1 / 3, 1 / 5], atol=1e-14)
    assert m.bias_constant == pytest.approx(-3 / 35, abs=1e-12)
    assert m.variance_constant == pytest.approx(9 / 4, abs=1e-12)


def test_bartlett_moments():
    m = kernel_moments("bartlett")
    assert m.K0 == pytest.approx(0.5, abs=1e-14)
    assert m.K2 == pytest.approx(1 / 12, abs=1e-14)


def test_callable_kernel_moments_match_named():
    a = kernel_moments(lambda u: 1.0 - u**2)
    b = kernel_moments("epanechnikov")
    assert a == b


def test_fixed_delta_constant_and_quadratic_have_zero_bias():
    bias, var = fixed_delta_bias_var(lambda w: np.full_like(w, 2.0), 0.0, 0.1, 800)
    assert bias == pytest.approx(0.0, abs=1e-12) and var > 0
    bias, _ = fixed_delta_bias_var(lambda w: 1.5 + 0.7 * (math.pi - w) ** 2, math.pi, 0.1, 800)
    assert bias == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.0, math.pi])
@pytest.mark.parametrize("seed", range(5))
def test_fixed_delta_matches_brute_force(theta, seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.5, 2.0, 4)
    f = lambda w: c[0] + c[1] * np.cos(w) ** 2 + c[2] * np.sin(3 * w) ** 2 + c[3] * np.abs(np.sin(w))  # noqa: E731
    b1, v1 = fixed_delta_bias_var(f, theta, 0.1, 800)
    b2, v2 = brute_force_bias_var(f, theta, 0.1, 800)
    assert b1 == pytest.approx(b2, abs=1e-10)
    assert v1 == pytest.approx(v2, rel=1e-10)


def test_fixed_delta_arma_bias_near_monte_carlo():
    spec = ArmaSpec(0.9, 0.4)
    bias, _ = fixed_delta_bias_var(lambda w: arma_true_spectrum(spec, w), 0.0, 0.1, 800)
    assert abs(bias / -110.462 - 1) < 0.25


def test_small_delta_uniform_variance_constant():
    spec = TrueSpectrum(lambda w: np.ones_like(w), 2.0, 0.0, 0.0)
    _, var = small_delta_bias_var(spec, 0.0, 0.1, 1000)
    assert var == pytest.approx(9 / 4 * 4.0 / 100, rel=1e-12)


def test_small_delta_gaussian_has_no_trispectral_term():
    spec = TrueSpectrum(lambda w: np.ones_like(w), 2.0, 0.0, 0.0, kurtosis=3.0)
    assert spec.trispectrum_at_boundary() == 0.0
    heavy = TrueSpectrum(spec.f, 2.0, 0.0, 0.0, kurtosis=9.0)
    assert small_delta_bias_var(heavy, 0.0, 0.1, 1000)[1] > small_delta_bias_var(spec, 0.0, 0.1, 1000)[1]


def test_small_delta_bias_agrees_with_fixed_delta_as_delta_shrinks():
    f = lambda w: 3 - w**2 / 2 + w**4 / 24 - w**6 / 720  # noqa: E731  Taylor polynomial of 2 + cos(w)
    spec = TrueSpectrum(f, 3.0, -1.0, 1.0)
    gaps = []
    for delta in (0.2, 0.1, 0.05, 0.025):
        b31, _ = fixed_delta_bias_var(f, 0.0, delta, 10**6)
        b32, _ = small_delta_bias_var(spec, 0.0, delta, 10**6)
        gaps.append(abs(b31 / b32 - 1))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-2


def test_linear_process_trispectral_term():
    assert linear_process_trispectral_term(5.0, 3.0) == 0.0
    assert linear_process_trispectral_term(2.0, 6.0) == 12.0
    assert linear_process_trispectral_term(2.0, 2.0) < 0


@pytest.mark.parametrize("theta", [0.0, math.pi])
def test_ols_weight_reproduces_constants_and_quadratics(theta):
    delta = 0.1
    g = ols_weight(theta, delta)
    pts = [theta - 2 * math.pi * delta, theta + 2 * math.pi * delta]
    pts = [p for p in pts if -math.pi < p < math.pi]
    assert spectral_mean(g, lambda l: 1.0, pts) == pytest.approx(1.0, abs=1e-8)
    assert spectral_mean(g, lambda l: (l - theta) ** 2, pts) == pytest.approx(0.0, abs=1e-8)


def test_wls_weight_reproduces_constants():
    g = wls_weight(0.0, 0.1, "bartlett")
    assert spectral_mean(g, lambda l: 1.0, [0.2 * math.pi]) == pytest.approx(1.0, abs=1e-8)


def test_spectral_mean_normalization():
    assert spectral_mean(lambda l: 1.0, lambda l: 1.0) == pytest.approx(1.0, abs=1e-14)
