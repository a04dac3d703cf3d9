"""Time-series primitives: mean, autocovariance, Fourier grid, periodogram, detrending.

All spectral quantities use the convention ``f(w) = sum_s exp(i w s) gamma(s)``,
i.e. no ``1/(2 pi)`` factor, so that ``f(0)`` is the long-run variance of the
sample mean.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MIN_ESTIMATION_LENGTH = 4


class SeriesError(ValueError):
    """Invalid time-series input (too short, non-finite, mismatched)."""


def as_series(x, min_length: int = 1) -> np.ndarray:
    """Validate and convert ``x`` to a 1-d float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise SeriesError("empty series")
    if arr.size < min_length:
        raise SeriesError(f"series too short: n={arr.size} < {min_length}")
    if not np.all(np.isfinite(arr)):
        raise SeriesError("series contains NaN or Inf")
    return arr


def sample_mean(x) -> float:
    return float(np.mean(as_series(x)))


@dataclass(frozen=True)
class Autocovariance:
    """Sample autocovariances with divisor n at lags 0..n-1.

    Lags with ``|k| >= n`` are zero; use :meth:`at` for arbitrary lags.
    """

    gamma: np.ndarray
    n: int

    def at(self, k) -> np.ndarray | float:
        k = np.abs(np.asarray(k, dtype=int))
        out = np.where(k < self.n, self.gamma[np.minimum(k, self.n - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def rho(self) -> np.ndarray:
        if self.gamma[0] <= 0:
            raise SeriesError("zero variance series has no autocorrelation")
        return self.gamma / self.gamma[0]


def sample_autocovariance(x) -> Autocovariance:
    x = as_series(x, min_length=2)
    n = x.size
    xc = x - x.mean()
    # Zero-padded FFT gives the full linear autocorrelation in O(n log n).
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[:n] / n
    acov[0] = float(np.dot(xc, xc)) / n
    return Autocovariance(gamma=acov, n=n)


@dataclass(frozen=True)
class FourierGrid:
    """Fourier frequencies ``w_j = 2 pi j / n`` for ``j`` in ``J_n``, ascending."""

    n: int
    indices: np.ndarray = field(repr=False)

    @property
    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * self.indices / self.n

    @property
    def half(self) -> int:
        """``[n/2]``, the largest index in ``J_n``."""
        return self.n // 2

    def position(self, j) -> np.ndarray | int:
        """Array position of Fourier index ``j`` (which must lie in ``J_n``)."""
        return np.asarray(j) - self.indices[0]

    def nearest_index(self, w) -> np.ndarray | int:
        """Index of the Fourier frequency closest to ``w`` after folding into [-pi, pi]."""
        w = np.asarray(w, dtype=float)
        folded = np.angle(np.exp(1j * w))
        j = np.rint(folded * self.n / (2.0 * np.pi)).astype(int)
        # -n/2 is not in J_n for even n; it aliases to +n/2.
        j = np.where(j < self.indices[0], j + self.n, j)
        return int(j) if j.ndim == 0 else j


def fourier_grid(n: int) -> FourierGrid:
    if n <= 0:
        raise SeriesError(f"grid size must be positive, got {n}")
    lo = -((n - 1) // 2)
    return FourierGrid(n=int(n), indices=np.arange(lo, lo + n))


def periodogram(x, grid: FourierGrid | None = None) -> np.ndarray:
    """Periodogram of the centered series at every Fourier frequency of ``grid``.

    Values are ordered like ``grid.indices``. ``I(0)`` is exactly zero.
    """
    x = as_series(x)
    n = x.size
    if grid is None:
        grid = fourier_grid(n)
    elif grid.n != n:
        raise SeriesError(f"grid size {grid.n} does not match series length {n}")
    xc = x - x.mean()
    dft = np.fft.fft(xc)
    vals = (dft.real**2 + dft.imag**2) / n
    out = vals[np.mod(grid.indices, n)]
    out[grid.position(0)] = 0.0
    # I(w) = I(-w) exactly; the FFT only guarantees it to rounding.
    pos = grid.indices > 0
    neg_idx = -grid.indices[pos]
    valid = neg_idx >= grid.indices[0]
    out[grid.position(neg_idx[valid])] = out[np.flatnonzero(pos)[valid]]
    return out


def periodogram_from_acf(acf: Autocovariance, w) -> np.ndarray:
    """Direct ``sum_s exp(i w s) gamma(s)`` evaluation; O(n) per frequency."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    s = np.arange(1, acf.n)
    return acf.gamma[0] + 2.0 * np.cos(np.outer(w, s)) @ acf.gamma[1:]


# --------------------------------------------------------------------------
# Detrending for the W_t = mu_t + X_t model


@dataclass(frozen=True)
class Seasonal:
    period: int


@dataclass(frozen=True)
class PiecewiseConstant:
    change_points: tuple[int, ...] = ()


@dataclass(frozen=True)
class Regression:
    basis: np.ndarray  # shape (n, d), column k is g_k(1..n)


@dataclass(frozen=True)
class TrendModel:
    kind: Seasonal | PiecewiseConstant | Regression
    eta_hat: np.ndarray

    def mean_function(self, n: int) -> np.ndarray:
        kind = self.kind
        if isinstance(kind, Seasonal):
            return self.eta_hat[np.arange(n) % kind.period]
        if isinstance(kind, PiecewiseConstant):
            edges = [0, *kind.change_points, n]
            return np.repeat(self.eta_hat, np.diff(edges))
        return kind.basis @ self.eta_hat


def detrend(w, model_kind) -> tuple[TrendModel, np.ndarray]:
    """Fit the parametric mean ``mu_t(eta)`` and return it with ``W_t - mu_t(eta_hat)``.

    Change points are 1-based times ``t`` such that the segment ends at ``t``.
    """
    w = as_series(w)
    n = w.size
    if isinstance(model_kind, Seasonal):
        d = model_kind.period
        if not 2 <= d <= n / 2:
            raise SeriesError(f"seasonal period must satisfy 2 <= d <= n/2, got d={d}, n={n}")
        phase = np.arange(n) % d
        eta = np.bincount(phase, weights=w, minlength=d) / np.bincount(phase, minlength=d)
    elif isinstance(model_kind, PiecewiseConstant):
        cps = tuple(int(c) for c in model_kind.change_points)
        edges = [0, *cps, n]
        if any(b - a < 2 for a, b in zip(edges[:-1], edges[1:])):
            raise SeriesError("every segment must contain at least 2 observations")
        model_kind = PiecewiseConstant(cps)
        eta = np.array([w[a:b].mean() for a, b in zip(edges[:-1], edges[1:])])
    elif isinstance(model_kind, Regression):
        basis = np.asarray(model_kind.basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.shape[0] != n:
            raise SeriesError(f"basis has {basis.shape[0]} rows, series has {n}")
        if np.linalg.matrix_rank(basis) < basis.shape[1]:
            raise SeriesError("regression basis is rank deficient")
        model_kind = Regression(basis)
        eta, *_ = np.linalg.lstsq(basis, w, rcond=None)
    else:
        raise TypeError(f"unknown trend model {model_kind!r}")
    model = TrendModel(kind=model_kind, eta_hat=np.asarray(eta, dtype=float))
    return model, w - model.mean_function(n)


# --------------------------------------------------------------------------
# CSV ingestion


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def read_series_csv(path: str | Path) -> tuple[np.ndarray, list[str] | None]:
    """Read a one- or two-column CSV into ``(values, labels)``.

    One column holds the numeric values; an optional second column holds time
    labels that are carried along but never used in computation. A leading
    header row and ``#`` comment lines are skipped.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            rows.append([c.strip() for c in row])
    if not rows:
        raise SeriesError(f"{path}: no data rows")
    ncol = len(rows[0])
    if ncol > 2:
        raise SeriesError(f"{path}: expected 1 or 2 columns, got {ncol}")

    def numeric_col(col):
        return all(_parse_float(r[col]) is not None for r in rows[1:]) and len(rows) > 1

    if ncol == 1:
        value_col = 0
    elif numeric_col(0) or len(rows) == 1:
        value_col = 0
    elif numeric_col(1):
        value_col = 1
    else:
        raise SeriesError(f"{path}: no numeric column found")
    if _parse_float(rows[0][value_col]) is None:
        rows = rows[1:]
    values = []
    for lineno, r in enumerate(rows, 1):
        if len(r) != ncol:
            raise SeriesError(f"{path}: ragged row {lineno}")
        v = _parse_float(r[value_col])
        if v is None:
            raise SeriesError(f"{path}: non-numeric value {r[value_col]!r} in row {lineno}")
        values.append(v)
    labels = [r[1 - value_col] for r in rows] if ncol == 2 else None
    return as_series(values), labels


def write_series_csv(path: str | Path, values: Sequence[float], labels: Sequence[str] | None = None,
                     header: str = "value") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if labels is None:
            writer.writerow([header])
            writer.writerows([[repr(float(v))] for v in values])
        else:
            writer.writerow([header, "label"])
            writer.writerows([[repr(float(v)), lab] for v, lab in zip(values, labels)])
