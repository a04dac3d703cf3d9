"""ARMA data generation and the Monte Carlo Bias/SD/RMSE harness."""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.signal import lfilter

from .boundary import (BoundaryFitConfig, estimate_f_boundary, fit_boundary_log, fit_boundary_ols,
                       flat_top_pilot, select_delta_star)
from .core import periodogram, sample_autocovariance
from .lagwindow import (FLAT_TOP, PARZEN, ar_fit_aic, ar_spectral_density, empirical_rule_bandwidth,
                        lw_spectral_estimate, parzen_plugin_bandwidth)

BURN_IN = 1000
NOISES = ("gaussian", "laplace", "t6")
FAILURE_LIMIT = 0.01


@dataclass(frozen=True)
class ArmaSpec:
    """``X_t - phi X_{t-1} = Z_t + vartheta Z_{t-1}`` with unit-variance noise."""

    phi: float = 0.0
    vartheta: float = 0.0
    noise: str = "gaussian"

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError(f"|phi| must be < 1, got {self.phi}")
        if self.noise not in NOISES:
            raise ValueError(f"noise must be one of {NOISES}, got {self.noise!r}")

    def describe(self) -> str:
        return f"ARMA(1,1) phi={self.phi:g} vartheta={self.vartheta:g} noise={self.noise}"

    @property
    def gamma0(self) -> float:
        return (1 + 2 * self.phi * self.vartheta + self.vartheta**2) / (1 - self.phi**2)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def unit_noise(kind: str, size: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    if kind == "gaussian":
        return rng.standard_normal(size)
    if kind == "laplace":
        return rng.laplace(0.0, 1.0 / math.sqrt(2.0), size)
    if kind == "t6":
        return rng.standard_t(6, size) * math.sqrt(2.0 / 3.0)
    raise ValueError(f"unknown noise {kind!r}")


def arma_simulate(spec: ArmaSpec, n: int, seed=None) -> np.ndarray:
    """Simulate ``n`` observations after a burn-in of 1000 steps started from zero."""
    z = unit_noise(spec.noise, n + BURN_IN + 1, seed)
    x = lfilter([1.0, spec.vartheta], [1.0, -spec.phi], z)
    return x[BURN_IN + 1:]


def quadratic_filter_simulate(a, b, n: int, seed=None) -> np.ndarray:
    """``X_t = sum_k a_k Z_{t-k} + sum_{k,l} b_{kl} Z_{t-k} Z_{t-l}`` with Gaussian ``Z``.

    ``a`` has length ``L``, ``b`` is ``L x L``. No centering is applied.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    L = a.size
    if b.shape != (L, L):
        raise ValueError(f"b must have shape ({L}, {L}), got {b.shape}")
    z = _rng(seed).standard_normal(n + BURN_IN + L)
    # lagged[t, k] = Z_{t-k}
    lagged = np.lib.stride_tricks.sliding_window_view(z, L)[:, ::-1]
    x = lagged @ a + np.einsum("tk,kl,tl->t", lagged, b, lagged)
    return x[-n:]


def arma_true_spectrum(spec: ArmaSpec, w):
    w = np.asarray(w, dtype=float)
    e = np.exp(-1j * w)
    out = np.abs(1 + spec.vartheta * e) ** 2 / np.abs(1 - spec.phi * e) ** 2
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Estimators evaluated in the harness. Each maps (x, theta) -> f_hat(theta).

Estimator = Callable[[np.ndarray, float], float]


def est_flat_top(x, theta):
    acf = sample_autocovariance(x)
    rule = empirical_rule_bandwidth(None, acf=acf)
    return max(lw_spectral_estimate(acf, FLAT_TOP, rule.M, theta), 0.0)


def est_parzen(x, theta):
    acf = sample_autocovariance(x)
    M = parzen_plugin_bandwidth(None, theta, acf=acf).M
    return lw_spectral_estimate(acf, PARZEN, M, theta)


def est_local_quad_auto(x, theta):
    return estimate_f_boundary(x, theta, "auto").f_at_theta


def est_ar_aic(x, theta):
    fit = ar_fit_aic(x)
    return ar_spectral_density(fit.coefficients, fit.sigma2, theta)


def local_poly_estimator(delta: float, degree: int = 2, target: str = "periodogram") -> Estimator:
    def est(x, theta):
        config = BoundaryFitConfig(theta, delta, degree, "uniform", target)
        I = periodogram(x)
        fit = fit_boundary_log(I, config) if target == "log" else fit_boundary_ols(I, config)
        return fit.f_at_theta
    return est


DEGREE_NAMES = {1: "constant", 2: "quadratic", 3: "quartic"}


def standard_estimators(deltas=(0.05, 0.10, 0.25), degrees=(1, 2, 3)) -> dict[str, Estimator]:
    """The comparison set: Parzen, flat-top, local quadratic at delta*, and fixed-delta fits."""
    ests = {"parzen": est_parzen, "flat-top": est_flat_top, "local-quadratic(auto)": est_local_quad_auto}
    for d in degrees:
        for delta in deltas:
            ests[f"local-{DEGREE_NAMES[d]}({delta:g})"] = local_poly_estimator(delta, d)
    return ests


# --------------------------------------------------------------------------
# Harness


@dataclass(frozen=True)
class MCRow:
    method: str
    bias: float
    sd: float
    rmse: float
    reps: int
    failures: int = 0


@dataclass(frozen=True)
class MCReport:
    rows: tuple[MCRow, ...]
    n: int
    reps: int
    seed: int
    theta: float
    dgp: str
    truth: float
    meta: dict = field(default_factory=dict)

    def row(self, method: str) -> MCRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "n", "theta", "bias", "sd", "rmse", "reps", "seed"])
            for r in self.rows:
                w.writerow([r.method, self.n, repr(self.theta), repr(r.bias), repr(r.sd), repr(r.rmse),
                            r.reps, self.seed])

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")


class MonteCarloAbort(RuntimeError):
    pass


def replication_seed(seed: int, r: int) -> np.random.SeedSequence:
    """Sub-seed for replication ``r``; independent of execution order."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(r,))


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("SPECDEN_THREADS", "0") or 0) or (os.cpu_count() or 1)
    return max(1, int(threads))


def _run_replications(simulate: Callable[[int], np.ndarray], work: Callable[[np.ndarray], dict],
                      reps: int, threads: int | None):
    def one(r):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return work(simulate(r))

    nthreads = worker_count(threads)
    if nthreads == 1:
        return [one(r) for r in range(reps)]
    with ThreadPoolExecutor(nthreads) as pool:
        return list(pool.map(one, range(reps)))


def _summarize(method: str, values: list[float], truth: float, reps: int) -> MCRow:
    ok = np.array([v for v in values if v is not None and math.isfinite(v)])
    failures = reps - ok.size
    if failures > FAILURE_LIMIT * reps:
        raise MonteCarloAbort(f"{method}: {failures} of {reps} replications failed")
    err = ok - truth
    k = ok.size
    mean_err = math.fsum(err) / k
    sd = math.sqrt(math.fsum((err - mean_err) ** 2) / (k - 1))
    rmse = math.sqrt(math.fsum(err**2) / k)
    return MCRow(method, mean_err, sd, rmse, k, failures)


def monte_carlo_report(spec: ArmaSpec, estimators: Mapping[str, Estimator], theta: float, n: int,
                       reps: int, seed: int, threads: int | None = None) -> MCReport:
    """Bias, SD (divisor reps-1) and RMSE of each estimator of ``f(theta)``.

    Every estimator sees the same simulated series in each replication.
    """
    if reps < 100:
        raise ValueError(f"reps must be at least 100, got {reps}")
    truth = arma_true_spectrum(spec, theta)
    names = list(estimators)

    def work(x):
        out = {}
        for name in names:
            try:
                out[name] = float(estimators[name](x, theta))
            except (ValueError, ArithmeticError, np.linalg.LinAlgError):
                out[name] = None
        return out

    results = _run_replications(lambda r: arma_simulate(spec, n, replication_seed(seed, r)), work,
                                reps, threads)
    rows = tuple(_summarize(name, [res[name] for res in results], truth, reps) for name in names)
    return MCReport(rows, n, reps, seed, float(theta), spec.describe(), truth)


DEFAULT_DELTA_GRID = np.linspace(0.005, 0.25, 50)


@dataclass(frozen=True)
class RmseCurve:
    deltas: np.ndarray
    rmse_quadratic: np.ndarray
    rmse_log: np.ndarray
    n: int
    reps: int
    seed: int
    theta: float
    dgp: str

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta", "rmse_quad", "rmse_log"])
            for row in zip(self.deltas, self.rmse_quadratic, self.rmse_log):
                w.writerow([repr(float(v)) for v in row])


def rmse_vs_delta_curve(spec: ArmaSpec, theta: float, n: int, reps: int, deltas=None, seed: int = 0,
                        threads: int | None = None) -> RmseCurve:
    """RMSE of the local quadratic and log-periodogram fits over a delta grid.

    Both methods and all grid points share the same replications.
    """
    deltas = DEFAULT_DELTA_GRID if deltas is None else np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0) or np.any(deltas > 0.25):
        raise ValueError("delta grid must lie in (0, 0.25]")
    truth = arma_true_spectrum(spec, theta)
    configs = [BoundaryFitConfig(theta, d, 2) for d in deltas]
    feasible = np.array([c.m(n) >= 2 * c.degree for c in configs])
    if not feasible.all():
        warnings.warn(f"{int((~feasible).sum())} delta values leave fewer than 4 ordinates at n={n}; "
                      "their RMSE is reported as NaN", RuntimeWarning, stacklevel=2)
    active = [c for c, ok in zip(configs, feasible) if ok]

    def work(x):
        I = periodogram(x)
        quad = np.full(len(configs), np.nan)
        logf = np.full(len(configs), np.nan)
        quad[feasible] = [fit_boundary_ols(I, c).f_at_theta for c in active]
        logf[feasible] = [fit_boundary_log(I, c).f_at_theta for c in active]
        return quad, logf

    results = _run_replications(lambda r: arma_simulate(spec, n, replication_seed(seed, r)), work,
                                reps, threads)
    quad = np.array([r[0] for r in results]) - truth
    logf = np.array([r[1] for r in results]) - truth
    return RmseCurve(deltas, np.sqrt((quad**2).mean(axis=0)), np.sqrt((logf**2).mean(axis=0)),
                     n, reps, seed, float(theta), spec.describe())


def delta_star_distribution(spec: ArmaSpec, theta: float, n: int, reps: int, seed: int = 0) -> np.ndarray:
    """Selected delta* across replications; a diagnostic for the bandwidth rule."""
    def work(x):
        acf = sample_autocovariance(x)
        return select_delta_star(acf, theta, flat_top_pilot(acf), n).delta_star

    return np.array(_run_replications(lambda r: arma_simulate(spec, n, replication_seed(seed, r)),
                                      work, reps, 1))
