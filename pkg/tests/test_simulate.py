import math

import numpy as np
import pytest

from specden.simulate import (DEFAULT_DELTA_GRID, ArmaSpec, MonteCarloAbort, arma_simulate, arma_true_spectrum,
                              monte_carlo_report, quadratic_filter_simulate, replication_seed,
                              rmse_vs_delta_curve, standard_estimators, unit_noise, worker_count)


def test_white_noise_variance():
    x = arma_simulate(ArmaSpec(), 4000, seed=1)
    assert abs(x.var() - 1) < 3 / math.sqrt(4000)


def test_same_seed_same_series():
    spec = ArmaSpec(0.5, 0.2, "laplace")
    np.testing.assert_array_equal(arma_simulate(spec, 50, 3), arma_simulate(spec, 50, 3))


def test_arma_variance_closed_form():
    spec = ArmaSpec(0.9, 0.4)
    assert spec.gamma0 == pytest.approx(1.88 / 0.19)
    # One path has relative SD of about 1.4% at this persistence; average four.
    v = np.mean([arma_simulate(spec, 100_000, seed=s).var() for s in range(4)])
    assert abs(v / spec.gamma0 - 1) < 0.02


@pytest.mark.parametrize("kind", ["gaussian", "laplace", "t6"])
def test_noise_has_unit_variance(kind):
    z = unit_noise(kind, 200_000, seed=2)
    assert abs(z.var() - 1) < 0.03


def test_invalid_specs():
    with pytest.raises(ValueError):
        ArmaSpec(1.0)
    with pytest.raises(ValueError):
        ArmaSpec(0.5, noise="cauchy")


def test_true_spectrum_values():
    spec = ArmaSpec(0.9, 0.4)
    assert arma_true_spectrum(spec, 0.0) == pytest.approx(196.0, rel=1e-12)
    assert arma_true_spectrum(spec, math.pi) == pytest.approx(0.36 / 3.61, rel=1e-12)
    np.testing.assert_allclose(arma_true_spectrum(ArmaSpec(), np.linspace(0, 3, 7)), 1.0)


def test_quadratic_filter_linear_part_only():
    z_filter = quadratic_filter_simulate([1.0], [[0.0]], 30, seed=4)
    assert z_filter.shape == (30,)
    with pytest.raises(ValueError):
        quadratic_filter_simulate([1.0, 0.5], [[1.0]], 10)


def test_replication_seed_independent_of_order():
    a = np.random.default_rng(replication_seed(7, 3)).standard_normal(3)
    b = np.random.default_rng(replication_seed(7, 3)).standard_normal(3)
    c = np.random.default_rng(replication_seed(7, 4)).standard_normal(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SPECDEN_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(1) == 1


def test_oracle_estimator_has_zero_error():
    spec = ArmaSpec(0.5)
    truth = arma_true_spectrum(spec, 0.0)
    rep = monte_carlo_report(spec, {"oracle": lambda x, t: truth}, 0.0, 50, 100, seed=1)
    row = rep.row("oracle")
    assert (row.bias, row.sd, row.rmse) == (0.0, 0.0, 0.0)


def test_report_reproducible_across_thread_counts(tmp_path):
    spec = ArmaSpec(0.9, 0.4)
    ests = standard_estimators()
    a = monte_carlo_report(spec, ests, 0.0, 200, 100, seed=8, threads=1)
    b = monte_carlo_report(spec, ests, 0.0, 200, 100, seed=8, threads=4)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "method,n,theta,bias,sd,rmse,reps,seed"
    a.to_json(tmp_path / "a.json")
    assert len(a.rows) == 12


def test_rmse_decomposition():
    rep = monte_carlo_report(ArmaSpec(0.3), standard_estimators(degrees=(2,)), math.pi, 120, 200, seed=2)
    for r in rep.rows:
        assert r.rmse**2 == pytest.approx(r.bias**2 + r.sd**2 * (r.reps - 1) / r.reps, rel=1e-10)


def test_failures_abort():
    def flaky(x, theta):
        raise ValueError("no")
    with pytest.raises(MonteCarloAbort):
        monte_carlo_report(ArmaSpec(), {"bad": flaky}, 0.0, 30, 100, seed=1)


def test_minimum_reps():
    with pytest.raises(ValueError):
        monte_carlo_report(ArmaSpec(), {}, 0.0, 30, 10, seed=1)


def test_default_curve_grid():
    assert DEFAULT_DELTA_GRID.size == 50
    assert DEFAULT_DELTA_GRID[0] == pytest.approx(0.005) and DEFAULT_DELTA_GRID[-1] == pytest.approx(0.25)


def test_rmse_curve_finite_and_positive(tmp_path):
    curve = rmse_vs_delta_curve(ArmaSpec(0.9, 0.4), 0.0, 800, 100, seed=1)
    assert np.all(np.isfinite(curve.rmse_quadratic)) and np.all(curve.rmse_quadratic > 0)
    assert np.all(np.isfinite(curve.rmse_log)) and np.all(curve.rmse_log > 0)
    curve.to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "delta,rmse_quad,rmse_log" and len(lines) == 51


def test_rmse_curve_rejects_wide_delta():
    with pytest.raises(ValueError):
        rmse_vs_delta_curve(ArmaSpec(), 0.0, 100, 100, deltas=[0.3])
