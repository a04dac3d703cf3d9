import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specden.boundary import (EULER_OFFSET, BoundaryFitConfig, BoundaryFitError, blended_estimate,
                              boundary_design, delta_grid, epsilon_floor, estimate_f_boundary, extend_bar_f,
                              extend_tilde_f, fit_boundary_log, fit_boundary_ols, fit_boundary_wls,
                              flat_top_pilot, kappa_weight, select_delta_star)
from specden.core import Autocovariance, SeriesError, fourier_grid, periodogram, sample_autocovariance
from specden.lagwindow import SpectralEstimate, positive_part


def _on_grid(n, g):
    """Periodogram-shaped array with value g(|w_j|) in J_n order."""
    grid = fourier_grid(n)
    return g(np.abs(grid.frequencies))


def test_design_band_at_zero():
    j, w, X = boundary_design(BoundaryFitConfig(0.0, 0.1, 2), 800)
    assert j.tolist() == list(range(1, 81))
    np.testing.assert_allclose(X[:, 1], w**2)


def test_design_band_at_pi():
    j, _, _ = boundary_design(BoundaryFitConfig(math.pi, 0.05, 1), 100)
    assert j.tolist() == [46, 47, 48, 49, 50]


def test_design_too_narrow():
    with pytest.raises(BoundaryFitError, match="bandwidth too small"):
        boundary_design(BoundaryFitConfig(0.0, 0.01, 2), 20)


def test_config_rejects_interior_theta():
    with pytest.raises(ValueError):
        BoundaryFitConfig(1.0, 0.1)


def test_ols_constant_data():
    res = fit_boundary_ols(np.full(200, 3.5), BoundaryFitConfig(0.0, 0.1, 2))
    np.testing.assert_allclose(res.coefficients, [3.5, 0.0], atol=1e-10)
    assert res.f_at_theta == pytest.approx(3.5, abs=1e-10)


@pytest.mark.parametrize("theta", [0.0, math.pi])
@pytest.mark.parametrize("kernel", ["uniform", "bartlett", "epanechnikov"])
def test_exact_quadratic_recovered(theta, kernel):
    I = _on_grid(400, lambda w: 2.0 + 5.0 * (theta - w) ** 2)
    cfg = BoundaryFitConfig(theta, 0.1, 2, kernel)
    for res in (fit_boundary_ols(I, cfg), fit_boundary_wls(I, cfg)):
        np.testing.assert_allclose(res.coefficients, [2.0, 5.0], atol=1e-10)


def test_exact_quartic_recovered():
    I = _on_grid(500, lambda w: 1.0 - 0.5 * w**2 + 0.25 * w**4)
    res = fit_boundary_ols(I, BoundaryFitConfig(0.0, 0.2, 3))
    np.testing.assert_allclose(res.coefficients, [1.0, -0.5, 0.25], atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(40, 400), st.floats(0.05, 0.3), st.integers(0, 2**31))
def test_ols_equals_uniform_wls(n, delta, seed):
    I = np.random.default_rng(seed).exponential(size=n)
    cfg = BoundaryFitConfig(0.0, delta, 2, "uniform")
    if cfg.m(n) < 4:
        return
    a = fit_boundary_ols(I, cfg).coefficients
    b = fit_boundary_wls(I, cfg).coefficients
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * np.abs(a).max())


def test_wls_degenerate_kernel():
    cfg = BoundaryFitConfig(0.0, 0.1, 2, kernel=lambda u: np.where(u < 1e-9, 1.0, 0.0))
    with pytest.raises(BoundaryFitError):
        fit_boundary_wls(np.ones(200), cfg)


def test_log_fit_on_constant_data():
    f = 2.0
    res = fit_boundary_log(np.full(300, math.e * f), BoundaryFitConfig(0.0, 0.1, 2, target="log"))
    assert res.coefficients[0] == pytest.approx(math.log(f) + 1 - EULER_OFFSET, abs=1e-12)
    assert res.f_at_theta == pytest.approx(f * math.exp(1 - EULER_OFFSET), rel=1e-12)


def test_log_fit_exact_exponential():
    A, B = 0.7, -1.3
    I = _on_grid(300, lambda w: np.exp(A + B * w**2 + EULER_OFFSET))
    res = fit_boundary_log(I, BoundaryFitConfig(0.0, 0.1, 2, target="log"))
    np.testing.assert_allclose(res.coefficients, [A, B], atol=1e-10)


def test_log_fit_drops_zero_ordinates(rng):
    I = rng.exponential(size=200)
    I[fourier_grid(200).position(3)] = 0.0
    res = fit_boundary_log(I, BoundaryFitConfig(0.0, 0.1, 2, target="log"))
    assert res.m_used == 19 and res.flags and res.f_at_theta > 0


def test_log_fit_too_few_positive():
    with pytest.raises(BoundaryFitError):
        fit_boundary_log(np.zeros(100), BoundaryFitConfig(0.0, 0.1, 2, target="log"))


def _fits(I, delta, target="periodogram"):
    return [fit_boundary_ols(I, BoundaryFitConfig(t, delta, 2, target=target)) if target != "log"
            else fit_boundary_log(I, BoundaryFitConfig(t, delta, 2, target="log")) for t in (0.0, math.pi)]


def test_extension_middle_band_zero_and_nearest_rule(rng):
    n = 100
    I = rng.exponential(size=n)
    est = extend_tilde_f(*_fits(I, 0.1), n)
    grid = fourier_grid(n)
    assert est.values[grid.position(25)] == 0.0
    assert est.values[grid.position(-25)] == 0.0
    fit0 = _fits(I, 0.1)[0]
    assert est.values[grid.position(5)] == pytest.approx(fit0.curve(2 * math.pi * 5 / n))
    assert est.at(2 * math.pi * 5 / n + 0.4 * 2 * math.pi / n) == est.values[grid.position(5)]
    bar = extend_bar_f(*_fits(I, 0.1, "log"), n)
    assert bar.values[grid.position(25)] == 0.0


def test_extension_overlap_error(rng):
    I = rng.exponential(size=40)
    with pytest.raises(ValueError, match="delta too large"):
        extend_tilde_f(*_fits(I, 0.3), 40)


def test_epsilon_floor():
    est = SpectralEstimate(np.array([0.0, 1.0, 2.0]), np.array([0.0, 5.0, -2.0]), "x")
    assert epsilon_floor(est, 1.0, 100).values.tolist() == [0.01, 5.0, 0.01]
    with pytest.raises(ValueError):
        epsilon_floor(est, 0.0, 100)


def test_kappa_weight_pieces():
    assert kappa_weight(0.0, 0.1) == 0.0
    assert kappa_weight(math.pi, 0.1) == 0.0
    assert kappa_weight(math.pi / 2, 0.1) == 1.0
    assert kappa_weight(-0.1 * math.pi, 0.1) == pytest.approx(0.5)


def test_blend_of_constants_is_identity():
    n = 64
    acf = Autocovariance(np.r_[3.0, np.zeros(n - 1)], n)
    grid = fourier_grid(n)
    const = SpectralEstimate(grid.frequencies, np.full(n, 3.0), "c")
    blend = blended_estimate(const, const, acf, 0.1)
    assert blend.C == pytest.approx(1.0)
    np.testing.assert_allclose(blend.values, 3.0)


def test_blend_interior_region_is_rescaled_interior(arma_series):
    acf = sample_autocovariance(arma_series)
    n = arma_series.size
    I = periodogram(arma_series)
    tilde = positive_part(extend_tilde_f(*_fits(I, 0.1), n))
    interior = positive_part(flat_top_pilot(acf))
    blend = blended_estimate(interior, tilde, acf, 0.1)
    mid = blend.kappa == 1.0
    np.testing.assert_allclose(blend.values[mid], interior.values[mid] / blend.C, rtol=1e-14)
    assert np.mean(blend.values) == pytest.approx(acf.gamma[0], rel=1e-12)


def test_blend_degenerate():
    n = 16
    grid = fourier_grid(n)
    zero = SpectralEstimate(grid.frequencies, np.zeros(n), "z")
    with pytest.raises(ValueError, match="degenerate"):
        blended_estimate(zero, zero, Autocovariance(np.r_[1.0, np.zeros(n - 1)], n), 0.1)


def test_delta_star_white_noise_pilot_picks_widest():
    n = 200
    grid = fourier_grid(n)
    pilot = SpectralEstimate(grid.frequencies, np.ones(n), "const")
    sel = select_delta_star(None, 0.0, pilot, n)
    np.testing.assert_allclose(sel.bias, 0.0, atol=1e-10)
    assert np.all(np.diff(sel.mse[np.diff(np.floor(sel.deltas * n + 1e-9), prepend=0) > 0]) <= 1e-15)
    assert sel.delta_star == pytest.approx(0.5)


def test_delta_grid_bounds():
    g = delta_grid(100)
    assert g[0] == pytest.approx(0.04) and g[-1] == pytest.approx(0.5) and g.size == 200
    with pytest.raises(BoundaryFitError):
        delta_grid(6)


def test_estimate_pipeline_options(arma_series):
    auto = estimate_f_boundary(arma_series, 0.0, "auto")
    assert 0 < auto.delta <= 0.5
    pos = estimate_f_boundary(arma_series, math.pi, 0.05, fix="positive")
    assert pos.f_at_theta >= 0
    eps = estimate_f_boundary(-arma_series, math.pi, 0.05, fix="epsilon", epsilon=2.0)
    assert eps.f_at_theta >= 2.0 / arma_series.size
    with pytest.raises(ValueError):
        estimate_f_boundary(arma_series, 0.0, "auto", degree=3)


def test_estimate_constant_series():
    with pytest.raises(SeriesError):
        estimate_f_boundary(np.full(50, 1.0), 0.0, 0.1)


def test_estimate_white_noise_unbiased_at_zero():
    n, reps = 800, 2000
    vals = np.array([estimate_f_boundary(np.random.default_rng(r).standard_normal(n), 0.0, "auto").f_at_theta
                     for r in range(reps)])
    assert abs(vals.mean() - 1.0) < 3 * vals.std(ddof=1) / math.sqrt(reps)


@settings(max_examples=25, deadline=None)
@given(st.integers(16, 300), st.integers(0, 2**31))
def test_log_and_floored_estimates_positive(n, seed):
    x = np.random.default_rng(seed).standard_t(3, n)
    delta = max(4.0 / n, 0.06)
    assert estimate_f_boundary(x, 0.0, delta, target="log").f_at_theta > 0
    assert estimate_f_boundary(x, math.pi, delta, fix="epsilon").f_at_theta > 0
