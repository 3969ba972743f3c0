"""Benchmark metrics: frictionless rebalancing reference, RVR, summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import PriceSeries
from .strategy import WeightTrajectory

SUMMARY_COLUMNS = (
    "strategy_id",
    "memory_days",
    "k",
    "gamma_bps",
    "gas_usd",
    "tau_cex_bps",
    "nu",
    "final_rvr_usd",
    "scaled_rvr",
    "pool_return",
    "cex_return",
    "lvr_usd",
    "monthly_volume_usd",
)


def lvr_reference(
    series: PriceSeries, trajectory: WeightTrajectory, initial_value: float
) -> np.ndarray:
    """Frictionless weight-matching self-financing portfolio value series.

    V(t) = V(t-1) + sum_i h_i(t-1)*(p_i(t) - p_i(t-1)) with holdings
    h_i(t-1) = w_i(t-1)*V(t-1)/p_i(t-1), which telescopes into a
    cumulative product of one-step growth factors.
    """
    p = series.prices
    w = trajectory.weights
    growth = np.sum(w[:-1] * p[1:] / p[:-1], axis=1)
    values = np.empty(series.n_steps)
    values[0] = initial_value
    values[1:] = initial_value * np.cumprod(growth)
    return values


def rvr(pool_values: np.ndarray, cex_values: np.ndarray) -> np.ndarray:
    """Pool value minus CEX-rebalanced value; positive means the pool wins."""
    pool_values = np.asarray(pool_values, float)
    cex_values = np.asarray(cex_values, float)
    if pool_values.shape != cex_values.shape:
        raise ValueError("value series lengths differ")
    return pool_values - cex_values


@dataclass(frozen=True)
class RunSummary:
    strategy_id: int
    memory_days: float
    k: float
    gamma_bps: float
    gas_usd: float
    tau_cex_bps: float
    nu: float
    final_rvr_usd: float
    scaled_rvr: float
    pool_return: float
    cex_return: float
    lvr_usd: float
    monthly_volume_usd: float

    def csv_row(self) -> str:
        vals = [getattr(self, c) for c in SUMMARY_COLUMNS]
        out = [str(self.strategy_id)]
        out += [repr(float(v)) for v in vals[1:]]
        return ",".join(out)


def summarize(
    strategy_id: int,
    memory_days: float,
    k: float,
    gamma: float,
    gas_usd: float,
    tau_cex: float,
    nu: float,
    pool_values: np.ndarray,
    cex_values: np.ndarray,
    lvr_values: np.ndarray,
    pool_volume_usd: float,
    step_seconds: int,
) -> RunSummary:
    """Aggregate one full run into a summary row.

    ``lvr_usd`` follows the classic sign convention (frictionless
    reference minus pool, loss positive); monthly volume normalises the
    total arbitrage outgoing-leg value to a 30-day window.
    """
    v0 = float(pool_values[0])
    final_rvr = float(pool_values[-1] - cex_values[-1])
    minutes = len(pool_values) * step_seconds / 60.0
    return RunSummary(
        strategy_id=strategy_id,
        memory_days=memory_days,
        k=k,
        gamma_bps=(1.0 - gamma) * 1e4,
        gas_usd=gas_usd,
        tau_cex_bps=tau_cex * 1e4,
        nu=nu,
        final_rvr_usd=final_rvr,
        scaled_rvr=final_rvr / v0,
        pool_return=float(pool_values[-1]) / v0 - 1.0,
        cex_return=float(cex_values[-1]) / float(cex_values[0]) - 1.0,
        lvr_usd=float(lvr_values[-1] - pool_values[-1]),
        monthly_volume_usd=pool_volume_usd * (30.0 * 1440.0 / minutes),
    )
