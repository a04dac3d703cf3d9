"""Matplotlib figures written next to the CSV/JSON outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (7.0, 4.3)


def _finish(fig, ax, path, xlabel, ylabel, title=None):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_spectrum(frequencies, values, path, label="estimate", periodogram=None, title=None):
    """Estimated density on ``[0, pi]``, optionally over the raw periodogram."""
    frequencies = np.asarray(frequencies)
    keep = frequencies >= 0
    fig, ax = plt.subplots(figsize=FIGSIZE)
    if periodogram is not None:
        ax.plot(frequencies[keep], np.asarray(periodogram)[keep], ".", color="0.7", ms=3,
                label="periodogram")
    ax.plot(frequencies[keep], np.asarray(values)[keep], "-", lw=1.5, label=label)
    ax.set_xlim(0, np.pi)
    ax.legend(frameon=False)
    _finish(fig, ax, path, "frequency (radians)", "spectral density", title)


def plot_rmse_curve(curve, path):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(curve.deltas, curve.rmse_quadratic, "-", color="k", label="local quadratic")
    ax.plot(curve.deltas, curve.rmse_log, "--", color="k", label="local log-periodogram")
    ax.legend(frameon=False)
    _finish(fig, ax, path, r"$\delta$", "RMSE", f"{curve.dgp}, n={curve.n}, theta={curve.theta:.4g}")


def plot_mc_report(report, path):
    names = [r.method for r in report.rows]
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(FIGSIZE[0], 0.35 * len(names) + 1.5))
    ax.barh(y - 0.2, [r.rmse for r in report.rows], height=0.4, label="RMSE")
    ax.barh(y + 0.2, [abs(r.bias) for r in report.rows], height=0.4, label="|Bias|")
    ax.set_yticks(y, names, fontsize=8)
    ax.invert_yaxis()
    ax.legend(frameon=False)
    _finish(fig, ax, path, "error", "", f"{report.dgp}, n={report.n}, reps={report.reps}")


def plot_series(values, path, title=None):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(np.arange(1, len(values) + 1), values, lw=1)
    _finish(fig, ax, path, "t", "value", title)
