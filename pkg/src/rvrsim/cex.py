"""Centralised-exchange rebalancing portfolio with commission and spread.

Each step the portfolio trades to the target weight row; the trade size
depends on the post-trade value and the cost depends on the trade, which
couples into a scalar fixed point V = M - cost(V) solved exactly per
segment of the piecewise-linear cost (see kernels.cex_solve_value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .market_data import PriceSeries
from .strategy import WeightTrajectory


class CexError(RuntimeError):
    pass


RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class CexCostParams:
    tau_cex: float
    spreads: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.spreads, dtype=np.float64))
        if not (0.0 <= self.tau_cex < 1.0):
            raise CexError("tau_cex must be in [0, 1)")
        if np.any(s < 0) or np.any(s >= 1):
            raise CexError("spreads must be in [0, 1)")
        s.flags.writeable = False
        object.__setattr__(self, "spreads", s)


@dataclass(frozen=True)
class CexState:
    reserves: np.ndarray
    value: float

    def __post_init__(self):
        R = np.ascontiguousarray(np.asarray(self.reserves, dtype=np.float64))
        if np.any(R < 0):
            raise CexError("reserves must be non-negative")
        object.__setattr__(self, "reserves", R)


def commission_cost(old, new, prices, tau: float) -> float:
    """Commission on the purchased legs only: tau * sum p_i * max(new-old, 0)."""
    delta = np.maximum(np.asarray(new, float) - np.asarray(old, float), 0.0)
    return float(tau * (np.asarray(prices, float) @ delta))


def spread_cost(old, new, prices, spreads) -> float:
    """Half-spread cost of trading via market orders: 0.5 * sum p_i s_i |dR_i|."""
    delta = np.abs(np.asarray(new, float) - np.asarray(old, float))
    return float(0.5 * ((np.asarray(prices, float) * np.asarray(spreads, float)) @ delta))


def solve_rebalance(
    state: CexState, target_w: np.ndarray, prices: np.ndarray, costs: CexCostParams
) -> tuple[CexState, np.ndarray, float]:
    """Trade to the target weights, charging commission and spread.

    Returns the new state, the trade vector (new - old reserves) and the
    total cost in numeraire.  The solved value satisfies
    ``|V - (mark_to_market - cost(V))| <= 1e-9 * V``.
    """
    p = np.asarray(prices, dtype=np.float64)
    w = np.asarray(target_w, dtype=np.float64)
    V, M = kernels.cex_solve_value(state.reserves, w, p, costs.tau_cex, costs.spreads)
    new_reserves = w * V / p
    cost = commission_cost(state.reserves, new_reserves, p, costs.tau_cex) + spread_cost(
        state.reserves, new_reserves, p, costs.spreads
    )
    if not (0.0 < V <= M) or abs(V + cost - M) > RESIDUAL_TOL * V:
        raise CexError(
            f"rebalance fixed point failed: V={V!r}, mark={M!r}, cost={cost!r}"
        )
    return CexState(new_reserves, V), new_reserves - state.reserves, cost


@dataclass(frozen=True)
class CexRun:
    """Per-step arrays from a full CEX rebalancing simulation."""

    values: np.ndarray
    cost_fees: np.ndarray
    cost_spread: np.ndarray
    turnover_usd: np.ndarray
    final_reserves: np.ndarray
    max_rel_residual: float


def run_cex(
    series: PriceSeries,
    trajectory: WeightTrajectory,
    costs: CexCostParams,
    initial_value: float,
) -> CexRun:
    """Run the rebalancing portfolio over the whole series.

    Initial reserves hold ``initial_value`` split per the first weight row
    at the first prices; every subsequent step rebalances to that step's
    target row.  The fixed-point residual bound is enforced, not assumed.
    """
    if trajectory.n_steps != series.n_steps:
        raise CexError("trajectory and series lengths differ")
    values, fees, spread, turnover, final_R, max_resid = kernels.cex_loop(
        series.prices, trajectory.weights, float(initial_value), float(costs.tau_cex), costs.spreads
    )
    if max_resid > RESIDUAL_TOL:
        raise CexError(f"rebalance residual {max_resid:.3e} exceeds {RESIDUAL_TOL:g}")
    return CexRun(values, fees, spread, turnover, final_R, float(max_resid))
