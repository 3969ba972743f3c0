"""Target weight trajectories: momentum (dynamic) or constant-mix.

The trajectory is the shared input to both rebalancing mechanisms; row t
only ever depends on prices at steps strictly before t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import PriceSeries


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyParams:
    kind: str  # "momentum" or "constant"
    base_weights: np.ndarray
    memory_days: float = 7.0
    aggressiveness_k: float = 0.0
    min_weight: float = 0.03
    rebalance_interval: int = 1440
    interpolation_steps: int = 1440

    def __post_init__(self):
        w = np.asarray(self.base_weights, dtype=np.float64)
        if self.kind not in ("momentum", "constant"):
            raise StrategyError(f"unknown strategy kind {self.kind!r}")
        if np.any(w <= 0) or np.any(w >= 1):
            raise StrategyError("base weights must lie strictly in (0, 1)")
        if abs(w.sum() - 1.0) > 1e-12:
            raise StrategyError("base weights must sum to 1")
        if not (0.0 < self.min_weight and self.min_weight * w.shape[0] < 1.0):
            raise StrategyError("min_weight must satisfy 0 < min_weight * N < 1")
        if self.rebalance_interval < 1 or self.interpolation_steps < 1:
            raise StrategyError("intervals must be at least 1 step")
        if self.kind == "momentum" and self.memory_days <= 0:
            raise StrategyError("memory_days must be positive")
        w = np.ascontiguousarray(w)
        w.flags.writeable = False
        object.__setattr__(self, "base_weights", w)


@dataclass(frozen=True)
class WeightTrajectory:
    """T x N matrix of target weights, one row per simulation step."""

    weights: np.ndarray
    min_weight: float

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        T, N = w.shape
        hi = 1.0 - (N - 1) * self.min_weight
        if np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-9):
            raise StrategyError("every weight row must sum to 1")
        if np.any(w < self.min_weight - 1e-12) or np.any(w > hi + 1e-12):
            raise StrategyError("weight rows violate the clamp bounds")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def n_steps(self) -> int:
        return self.weights.shape[0]


def _halflife_steps(memory_days: float, steps_per_day: float) -> float:
    return memory_days * steps_per_day


def ewma_log_gradient(series: PriceSeries, memory_days: float, step: int) -> np.ndarray:
    """Bias-corrected EWMA of one-step log-price changes through ``step``.

    Half-life is ``memory_days`` worth of steps.  The correction divides
    out the warm-up mass so the infinite-memory limit is the running mean
    of the log increments.
    """
    if step < 1:
        raise StrategyError("step must be at least 1")
    decay = 0.5 ** (1.0 / _halflife_steps(memory_days, series.steps_per_day))
    logp = np.log(series.prices[: step + 1])
    incr = np.diff(logp, axis=0)  # increments r_1 .. r_step
    n = incr.shape[0]
    w = decay ** np.arange(n - 1, -1, -1)
    return w @ incr / w.sum()


def clamp_normalize(raw: np.ndarray, min_weight: float) -> np.ndarray:
    """Clip entries into [min_weight, 1-(N-1)*min_weight] and rescale to sum 1.

    Clipping and renormalising are alternated until both constraints hold;
    already-valid vectors pass through unchanged up to float division.
    """
    v = np.asarray(raw, dtype=np.float64).copy()
    N = v.shape[0]
    hi = 1.0 - (N - 1) * min_weight
    for _ in range(100):
        v = np.clip(v, min_weight, hi)
        v = v / v.sum()
        if np.all(v >= min_weight - 1e-15) and np.all(v <= hi + 1e-15):
            return v
    raise StrategyError("clamp_normalize failed to converge")


def momentum_target(params: StrategyParams, gradient: np.ndarray) -> np.ndarray:
    """Tilt base weights by k times the demeaned trend estimate.

    raw_i = base_i + k * (g_i - <g>), with <g> the base-weighted mean, so
    the raw vector still sums to 1 before clamping.
    """
    if params.kind != "momentum":
        raise StrategyError("momentum_target requires a momentum strategy")
    g = np.asarray(gradient, dtype=np.float64)
    mean = float(params.base_weights @ g)
    raw = params.base_weights + params.aggressiveness_k * (g - mean)
    return clamp_normalize(raw, params.min_weight)


def build_trajectory(params: StrategyParams, series: PriceSeries) -> WeightTrajectory:
    """Target weight row for every step of the series.

    At each multiple of ``rebalance_interval`` a new target is computed
    from prices strictly before that step; weights then move linearly to
    the target over ``interpolation_steps`` and hold.
    """
    T = series.n_steps
    N = series.n_assets
    if T < params.rebalance_interval:
        raise StrategyError("series shorter than one rebalance interval")
    out = np.empty((T, N))
    out[:] = params.base_weights
    if params.kind == "constant":
        return WeightTrajectory(out, params.min_weight)

    decay = 0.5 ** (1.0 / _halflife_steps(params.memory_days, series.steps_per_day))
    logp = np.log(series.prices)
    num = np.zeros(N)
    den = 0.0
    current = params.base_weights.copy()
    for t in range(1, T):
        # fold in r_t before deciding the row: the signal at a rebalance
        # step t uses increments through t-1 only
        if t % params.rebalance_interval == 0:
            target = momentum_target(params, num / den if den > 0 else np.zeros(N))
            start = out[t - 1].copy()
            m = params.interpolation_steps
            n_fill = min(m, T - t)
            frac = (np.arange(1, n_fill + 1) / m)[:, None]
            out[t : t + n_fill] = start + frac * (target - start)
            if t + n_fill < T:
                out[t + n_fill :] = target
        num = decay * num + (logp[t] - logp[t - 1])
        den = decay * den + 1.0
    return WeightTrajectory(out, params.min_weight)
