"""Command-line interface: ``specden estimate | simulate | infer``.

Exit codes: 0 success, 2 I/O error, 3 validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import (BoundaryFitConfig, BoundaryFitError, blended_estimate, epsilon_floor, extend_bar_f,
                       extend_tilde_f, fit_boundary_log, fit_boundary_ols, fit_boundary_wls, flat_top_pilot,
                       select_delta_star)
from .core import SeriesError, fourier_grid, periodogram, read_series_csv, sample_autocovariance
from .inference import (TABLE_METHODS, NonPositiveVariance, changepoint_test, estimate_f0,
                        mean_confidence_interval, mean_t_test)
from .lagwindow import (FLAT_TOP, PARZEN, SpectralEstimate, ar_fit_aic, ar_spectral_density,
                        empirical_rule_bandwidth, lw_spectral_estimate, parzen_plugin_bandwidth,
                        positive_part)
from .simulate import (ArmaSpec, MonteCarloAbort, local_poly_estimator, monte_carlo_report,
                       rmse_vs_delta_curve, standard_estimators)

EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL = 2, 3, 4

ESTIMATE_METHODS = ("blended", "local-quad", "local-const", "local-quartic", "log-periodogram",
                    "flat-top", "parzen", "ar")
DEGREES = {"local-const": 1, "local-quad": 2, "local-quartic": 3, "log-periodogram": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _theta(text: str) -> float:
    t = text.strip().lower()
    if t in ("pi", "π"):
        return math.pi
    try:
        value = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be 0 or pi, got {text!r}") from None
    if value == 0.0 or abs(value - math.pi) < 1e-9:
        return 0.0 if value == 0.0 else math.pi
    raise argparse.ArgumentTypeError(f"theta must be 0 or pi, got {text!r}")


def _metadata(args, **resolved) -> dict:
    return {
        "specden_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "command": args.command,
        "argv": sys.argv[1:],
        **resolved,
    }


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _sidecar(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


# --------------------------------------------------------------------------
# estimate


def _resolve_delta(args, acf, n, theta=0.0):
    if args.delta is not None:
        return args.delta, None
    pilot = flat_top_pilot(acf)
    sel = select_delta_star(acf, theta, pilot, n)
    return sel.delta_star, sel


def _boundary_fit(I, config, kernel):
    if config.target == "log":
        return fit_boundary_log(I, config)
    if kernel == "uniform":
        return fit_boundary_ols(I, config)
    return fit_boundary_wls(I, config)


def cmd_estimate(args) -> int:
    x, _ = read_series_csv(args.input)
    n = x.size
    acf = sample_autocovariance(x)
    if acf.gamma[0] <= 0:
        raise SeriesError("zero variance series")
    grid = fourier_grid(n)
    I = periodogram(x, grid)
    meta: dict = {"method": args.method, "n": n, "gamma0": float(acf.gamma[0])}
    flags: list[str] = []
    method = args.method
    degree = DEGREES.get(method, 2)
    if (args.delta is None and method in ("local-const", "local-quartic")):
        raise UsageError(f"{method} has no data-driven delta; pass --delta")

    def lag_window(kind):
        if kind == "flat-top":
            if args.M is not None:
                M = args.M
            else:
                rule = empirical_rule_bandwidth(None, acf=acf)
                M = rule.M
                meta["q_hat"] = rule.q_hat
                if rule.capped:
                    flags.append("empirical rule capped at n/4")
            est = positive_part(SpectralEstimate(grid.frequencies,
                                                 lw_spectral_estimate(acf, FLAT_TOP, M, grid.frequencies),
                                                 "flat-top", {"M": M}))
        else:
            if args.M is not None:
                M = args.M
            else:
                bw = parzen_plugin_bandwidth(None, args.theta or 0.0, acf=acf)
                M = bw.M
                if bw.fallback:
                    flags.append("parzen plug-in fell back to n^(1/5)")
            est = SpectralEstimate(grid.frequencies, lw_spectral_estimate(acf, PARZEN, M, grid.frequencies),
                                   "parzen", {"M": M})
        meta["M"] = M
        return est

    if method in ("flat-top", "parzen"):
        est = lag_window(method)
    elif method == "ar":
        fit = ar_fit_aic(x)
        est = SpectralEstimate(grid.frequencies, ar_spectral_density(fit.coefficients, fit.sigma2,
                                                                     grid.frequencies), "ar-aic")
        meta.update(ar_order=fit.order, ar_coefficients=fit.coefficients, ar_sigma2=fit.sigma2)
    else:
        target = "log" if method == "log-periodogram" else "periodogram"
        if args.theta is not None and method != "blended":
            delta, sel = _resolve_delta(args, acf, n, args.theta)
            fit = _boundary_fit(I, BoundaryFitConfig(args.theta, delta, degree, args.kernel, target), args.kernel)
            value = fit.f_at_theta
            if args.fix == "positive":
                value = max(value, 0.0)
            elif args.fix == "epsilon":
                value = max(value, args.epsilon * acf.gamma[0] / n)
            est = SpectralEstimate(np.array([args.theta]), np.array([value]), method)
            meta.update(delta=delta, m=fit.m_used, coefficients=fit.coefficients,
                        design_condition=fit.design_condition, theta=args.theta)
            flags.extend(fit.flags)
            if sel is not None:
                meta["delta_star"] = sel.delta_star
        else:
            delta, sel = _resolve_delta(args, acf, n, 0.0)
            if sel is not None:
                meta["delta_star"] = sel.delta_star
            meta["delta"] = delta
            fits = [_boundary_fit(I, BoundaryFitConfig(t, delta, degree, args.kernel, target), args.kernel)
                    for t in (0.0, math.pi)]
            for f in fits:
                flags.extend(f.flags)
            tilde = (extend_bar_f if target == "log" else extend_tilde_f)(fits[0], fits[1], n)
            if args.fix == "epsilon" or (method == "blended" and args.fix is None and target == "log"):
                tilde = epsilon_floor(tilde, args.epsilon * acf.gamma[0], n)
            else:
                tilde = positive_part(tilde)
            if method == "blended":
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    interior = lag_window("flat-top")
                    blend = blended_estimate(interior, tilde, acf, delta)
                flags.extend(str(c.message) for c in caught)
                flags.extend(blend.flags)
                est = blend.estimate
                meta.update(C=blend.C, blend_delta=blend.delta)
            else:
                est = tilde
            meta["f0"] = fits[0].f_at_theta
            meta["f_pi"] = fits[1].f_at_theta

    keep = est.frequencies >= 0
    out = Path(args.output) if args.output else Path(args.input).with_suffix(f".{method}.{args.format}")
    rows = list(zip(est.frequencies[keep], est.values[keep]))
    meta["flags"] = flags
    if args.format == "csv":
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["frequency", "value"])
            w.writerows([[repr(float(a)), repr(float(b))] for a, b in rows])
    else:
        _write_json(out, {"frequency": [float(a) for a, _ in rows], "value": [float(b) for _, b in rows],
                          "metadata": meta})
    _write_json(_sidecar(out), _metadata(args, **meta))
    if args.plot:
        from .plotting import plot_spectrum
        plot_spectrum(est.frequencies, est.values, args.plot, label=method,
                      periodogram=I if est.frequencies.size == n else None)
    print(out)
    return 0


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    spec = ArmaSpec(args.phi, args.vartheta, args.noise)
    if args.curve:
        deltas = np.linspace(args.delta_min, args.delta_max, args.grid)
        curve = rmse_vs_delta_curve(spec, args.theta, args.n, args.reps, deltas, args.seed, args.threads)
        out = Path(args.output or f"curve_seed{args.seed}.csv")
        curve.to_csv(out)
        meta = {"dgp": curve.dgp, "n": args.n, "reps": args.reps, "seed": args.seed, "theta": args.theta,
                "grid": args.grid}
        if args.plot:
            from .plotting import plot_rmse_curve
            plot_rmse_curve(curve, args.plot)
    else:
        deltas = tuple(args.deltas)
        ests = standard_estimators(deltas)
        if args.log_deltas:
            for d in args.log_deltas:
                ests[f"log-periodogram({d:g})"] = local_poly_estimator(d, 2, "log")
        if args.ar:
            from .simulate import est_ar_aic
            ests["ar-aic"] = est_ar_aic
        if args.methods:
            unknown = set(args.methods) - set(ests)
            if unknown:
                raise UsageError(f"unknown methods {sorted(unknown)}; available: {list(ests)}")
            ests = {k: ests[k] for k in args.methods}
        report = monte_carlo_report(spec, ests, args.theta, args.n, args.reps, args.seed, args.threads)
        out = Path(args.output or f"report_seed{args.seed}.{args.format}")
        if args.format == "csv":
            report.to_csv(out)
        else:
            report.to_json(out)
        meta = {"dgp": report.dgp, "n": args.n, "reps": args.reps, "seed": args.seed, "theta": args.theta,
                "truth": report.truth, "failures": {r.method: r.failures for r in report.rows}}
        if args.plot:
            from .plotting import plot_mc_report
            plot_mc_report(report, args.plot)
    # No argv or timing in the sidecar: reruns with the same seed must be byte-identical.
    _write_json(_sidecar(out), {"specden_version": __version__, "command": "simulate", **meta})
    print(out)
    return 0


# --------------------------------------------------------------------------
# infer


def cmd_infer(args) -> int:
    x, _ = read_series_csv(args.input)
    methods = TABLE_METHODS if args.f0 == "all" else (args.f0,)
    record: dict = {"n": int(x.size), "mean": float(x.mean()), "methods": {}}
    if args.changepoint:
        if args.tstar is None or args.mdep is None:
            raise UsageError("--changepoint requires --tstar and --mdep")
        record.update(t_star=args.tstar, m_dep=args.mdep)
        for m in methods:
            res = changepoint_test(x, args.tstar, args.mdep, m, args.alternative or "less")
            record["methods"][m] = {"spectrum": res.f0_estimate, "t_statistic": res.statistic,
                                    "p_value": res.p_value, "n1": res.n1, "n2": res.n2,
                                    "mean1": res.mean1, "mean2": res.mean2, **res.details}
    else:
        if not args.mu0:
            raise UsageError("infer needs --mu0 (or --changepoint)")
        alternative = args.alternative or "two-sided"
        record.update(mu0=args.mu0, alternative=alternative, level=args.level, scale=args.scale)
        for m in methods:
            f0 = estimate_f0(x, m)
            entry = {"spectrum": f0.value, **f0.details, "tests": []}
            for mu0 in args.mu0:
                t = mean_t_test(x, mu0, alternative, f0=f0)
                entry["tests"].append({"mu0": mu0, "t_statistic": t.statistic, "p_value": t.p_value})
            lo, hi = mean_confidence_interval(x, args.level, f0=f0, scale=args.scale)
            entry.update(lower_limit=lo, upper_limit=hi)
            record["methods"][m] = entry
    record["metadata"] = _metadata(args)
    out = Path(args.output) if args.output else Path(args.input).with_suffix(".infer.json")
    _write_json(out, record)
    print(out)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specden", description="Boundary-corrected spectral density estimation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", help="estimate the spectral density of a series")
    e.add_argument("input")
    e.add_argument("--method", choices=ESTIMATE_METHODS, default="blended")
    e.add_argument("--theta", type=_theta, default=None, help="0 or pi: single boundary estimate")
    dg = e.add_mutually_exclusive_group()
    dg.add_argument("--delta", type=float)
    dg.add_argument("--auto-delta", action="store_true", help="plug-in MSE choice of delta (default)")
    mg = e.add_mutually_exclusive_group()
    mg.add_argument("--M", type=float, dest="M")
    mg.add_argument("--auto-M", action="store_true", help="data-driven lag-window bandwidth (default)")
    e.add_argument("--kernel", choices=("uniform", "bartlett", "epanechnikov"), default="uniform")
    e.add_argument("--fix", choices=("positive", "epsilon"), default=None)
    e.add_argument("--epsilon", type=float, default=1.0, help="floor is epsilon * gamma(0) / n")
    e.add_argument("-o", "--output")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--plot", help="also write a figure (png/pdf/svg) to this path")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", help="Monte Carlo comparison on an ARMA(1,1) process")
    s.add_argument("--phi", type=float, default=0.9)
    s.add_argument("--vartheta", type=float, default=0.4)
    s.add_argument("--noise", choices=("gaussian", "laplace", "t6"), default="gaussian")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--theta", type=_theta, default=0.0)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--threads", type=int, default=None, help="worker threads (default SPECDEN_THREADS)")
    s.add_argument("--deltas", type=float, nargs="+", default=[0.05, 0.10, 0.25])
    s.add_argument("--log-deltas", type=float, nargs="*", default=None)
    s.add_argument("--ar", action="store_true", help="include the AR-AIC estimator")
    s.add_argument("--methods", nargs="+", help="restrict to these method names")
    s.add_argument("--curve", action="store_true", help="RMSE-versus-delta table instead of a report")
    s.add_argument("--grid", type=int, default=50)
    s.add_argument("--delta-min", type=float, default=0.005)
    s.add_argument("--delta-max", type=float, default=0.25)
    s.add_argument("-o", "--output")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--plot")
    s.set_defaults(func=cmd_simulate)

    i = sub.add_parser("infer", help="t-tests, confidence intervals and change-point tests for the mean")
    i.add_argument("input")
    i.add_argument("--mu0", type=float, action="append")
    i.add_argument("--alternative", choices=("greater", "less", "two-sided"))
    i.add_argument("--f0", choices=("all", "parzen", "flat-top", "local-quad", "local-quad-eps",
                                    "log-periodogram", "ar-ols"), default="all")
    i.add_argument("--level", type=float, default=0.95)
    i.add_argument("--scale", type=float, default=1.0, help="multiply interval limits (4 annualizes quarterly)")
    i.add_argument("--changepoint", action="store_true")
    i.add_argument("--tstar", type=int)
    i.add_argument("--mdep", type=int)
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_infer)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"specden: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NonPositiveVariance, BoundaryFitError, MonteCarloAbort, np.linalg.LinAlgError,
            FloatingPointError, ArithmeticError) as exc:
        print(f"specden: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, SeriesError, ValueError) as exc:
        print(f"specden: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
