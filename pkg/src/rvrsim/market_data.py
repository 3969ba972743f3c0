"""Price series loading, validation and synthetic path generation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class MarketDataError(ValueError):
    """Raised for malformed or inconsistent price data."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """Timestamped per-asset mid prices at fixed resolution.

    timestamps: seconds since epoch, strictly increasing, uniform spacing.
    prices: (T, N) matrix of strictly positive numeraire prices.
    """

    timestamps: np.ndarray
    prices: np.ndarray
    asset_labels: tuple[str, ...]

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        px = np.asarray(self.prices, dtype=np.float64)
        labels = tuple(str(x) for x in self.asset_labels)
        if px.ndim != 2:
            raise MarketDataError("prices must be a T x N matrix")
        T, N = px.shape
        if N < 2:
            raise MarketDataError("need at least 2 assets")
        if T < 2:
            raise MarketDataError("need at least 2 rows")
        if ts.shape != (T,):
            raise MarketDataError("timestamps length does not match prices")
        if len(labels) != N:
            raise MarketDataError("asset_labels length does not match prices")
        if not np.all(np.isfinite(px)) or np.any(px <= 0.0):
            raise MarketDataError("all prices must be strictly positive and finite")
        steps = np.diff(ts)
        if np.any(steps <= 0):
            raise MarketDataError("timestamps must be strictly increasing")
        if np.any(steps != steps[0]):
            raise MarketDataError("timestamps must be uniformly spaced")
        object.__setattr__(self, "timestamps", _freeze(ts))
        object.__setattr__(self, "prices", _freeze(px))
        object.__setattr__(self, "asset_labels", labels)

    @property
    def n_steps(self) -> int:
        return self.prices.shape[0]

    @property
    def n_assets(self) -> int:
        return self.prices.shape[1]

    @property
    def step_seconds(self) -> int:
        return int(self.timestamps[1] - self.timestamps[0])

    @property
    def steps_per_day(self) -> float:
        return 86400.0 / self.step_seconds

    def truncated(self, n_steps: int) -> "PriceSeries":
        """First n_steps rows as a new series."""
        return PriceSeries(self.timestamps[:n_steps], self.prices[:n_steps], self.asset_labels)


@dataclass(frozen=True)
class GbmSpec:
    """Correlated geometric Brownian motion parameters (per-step units)."""

    initial_prices: np.ndarray
    drifts: np.ndarray
    volatilities: np.ndarray
    correlation: np.ndarray
    steps: int
    seed: int
    step_seconds: int = 60

    def __post_init__(self):
        p0 = np.asarray(self.initial_prices, dtype=np.float64)
        mu = np.asarray(self.drifts, dtype=np.float64)
        sig = np.asarray(self.volatilities, dtype=np.float64)
        corr = np.asarray(self.correlation, dtype=np.float64)
        N = p0.shape[0]
        if np.any(p0 <= 0):
            raise MarketDataError("initial prices must be positive")
        if mu.shape != (N,) or sig.shape != (N,):
            raise MarketDataError("drifts/volatilities must match initial_prices")
        if np.any(sig < 0):
            raise MarketDataError("volatilities must be non-negative")
        if corr.shape != (N, N):
            raise MarketDataError("correlation must be N x N")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise MarketDataError("correlation must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise MarketDataError("correlation must have unit diagonal")
        if np.linalg.eigvalsh(corr).min() < -1e-12:
            raise MarketDataError("correlation must be positive semi-definite")
        if self.steps < 2:
            raise MarketDataError("steps must be at least 2")
        object.__setattr__(self, "initial_prices", _freeze(p0))
        object.__setattr__(self, "drifts", _freeze(mu))
        object.__setattr__(self, "volatilities", _freeze(sig))
        object.__setattr__(self, "correlation", _freeze(corr))


def generate_gbm(spec: GbmSpec) -> PriceSeries:
    """Deterministic correlated GBM path; identical seed gives identical series."""
    N = spec.initial_prices.shape[0]
    corr = np.asarray(spec.correlation)
    try:
        L = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        # near-PSD: symmetric factor from the eigendecomposition
        vals, vecs = np.linalg.eigh(corr)
        L = vecs * np.sqrt(np.clip(vals, 0.0, None))
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((spec.steps - 1, N))
    increments = spec.drifts + spec.volatilities * (z @ L.T)
    log_prices = np.log(spec.initial_prices) + np.vstack(
        [np.zeros(N), np.cumsum(increments, axis=0)]
    )
    timestamps = np.arange(spec.steps, dtype=np.int64) * spec.step_seconds
    labels = tuple(f"A{i}" for i in range(N))
    return PriceSeries(timestamps, np.exp(log_prices), labels)


def load_price_csv(path, expected_assets=None) -> PriceSeries:
    """Load a `timestamp,<label>,...` CSV into a validated PriceSeries.

    Any row with a missing, non-numeric or non-positive price is an error
    naming the offending line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MarketDataError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "timestamp":
            raise MarketDataError(
                f"{path}: header must be 'timestamp,<label1>,...,<labelN>'"
            )
        labels = tuple(header[1:])
        if expected_assets is not None and labels != tuple(expected_assets):
            raise MarketDataError(
                f"{path}: asset labels {labels} do not match expected {tuple(expected_assets)}"
            )
        timestamps = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MarketDataError(f"{path}: line {lineno}: expected {len(header)} fields")
            try:
                ts = int(row[0])
                values = [float(x) for x in row[1:]]
            except ValueError:
                raise MarketDataError(f"{path}: line {lineno}: malformed number") from None
            if any(not np.isfinite(v) or v <= 0.0 for v in values):
                raise MarketDataError(f"{path}: line {lineno}: non-positive or missing price")
            timestamps.append(ts)
            rows.append(values)
    if len(rows) < 2:
        raise MarketDataError(f"{path}: need at least 2 data rows")
    ts = np.asarray(timestamps, dtype=np.int64)
    steps = np.diff(ts)
    if np.any(steps <= 0):
        raise MarketDataError(f"{path}: timestamps must be strictly increasing")
    if np.any(steps != steps[0]):
        bad = int(np.argmax(steps != steps[0]))
        raise MarketDataError(
            f"{path}: non-uniform timestamp spacing at line {bad + 3}"
        )
    return PriceSeries(ts, np.asarray(rows), labels)


def save_price_csv(series: PriceSeries, path) -> None:
    """Write a PriceSeries; load_price_csv round-trips it bit-exactly."""
    with open(path, "w", newline="") as fh:
        fh.write("timestamp," + ",".join(series.asset_labels) + "\n")
        for t in range(series.n_steps):
            row = ",".join(repr(float(x)) for x in series.prices[t])
            fh.write(f"{int(series.timestamps[t])},{row}\n")
