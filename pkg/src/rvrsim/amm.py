"""Weighted geometric-mean pool: pricing, optimal arbitrage, simulation.

The pool accepts a trade when the post-trade virtual reserves
R_i - out_i + gamma*in_i stay on the invariant surface prod R_i^{w_i} = k
at the current weights.  The pool keeps the whole inflow, so with
gamma < 1 every executed trade grows the invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .market_data import PriceSeries
from .strategy import WeightTrajectory


class AmmError(RuntimeError):
    pass


@dataclass(frozen=True)
class PoolState:
    reserves: np.ndarray
    weights: np.ndarray
    gamma: float

    def __post_init__(self):
        R = np.ascontiguousarray(np.asarray(self.reserves, dtype=np.float64))
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if np.any(R <= 0):
            raise AmmError("reserves must be strictly positive")
        if np.any(w <= 0) or np.any(w >= 1) or abs(w.sum() - 1.0) > 1e-9:
            raise AmmError("weights must be in (0,1) and sum to 1")
        if not (0.0 < self.gamma <= 1.0):
            raise AmmError("gamma must be in (0, 1]")
        object.__setattr__(self, "reserves", R)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class ArbParams:
    gas_cost_usd: float = 1.0
    discovery_delay_steps: int = 1
    noise_multiplier: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.gas_cost_usd) or self.gas_cost_usd < 0:
            raise AmmError("gas_cost_usd must be finite and non-negative")
        if self.discovery_delay_steps < 0:
            raise AmmError("discovery_delay_steps must be non-negative")
        if self.noise_multiplier < 0:
            raise AmmError("noise_multiplier must be non-negative")


@dataclass(frozen=True)
class TradeOutcome:
    executed: bool
    delta_in: np.ndarray
    delta_out: np.ndarray
    arb_profit_usd: float
    volume_usd: float


def pool_value(state: PoolState, prices: np.ndarray) -> float:
    """Mark-to-market value sum R_i * p_i."""
    return float(state.reserves @ np.asarray(prices, dtype=np.float64))


def invariant_k(state: PoolState) -> float:
    """Weighted geometric mean of reserves, computed in log space."""
    return float(np.exp(state.weights @ np.log(state.reserves)))


def aligned_reserves(state: PoolState, prices: np.ndarray) -> np.ndarray:
    """Reserves on the invariant surface with value split exactly per weights.

    R'_i = (w_i/p_i) * k / prod_j (w_j/p_j)^{w_j}; this is also where an
    arbitrageur moves the pool when gamma = 1.
    """
    p = np.asarray(prices, dtype=np.float64)
    w = state.weights
    log_ratio = np.log(w / p)
    log_scale = np.log(invariant_k(state)) - w @ log_ratio
    return np.exp(log_ratio + log_scale)


def _outcome_from_solution(state, prices, B, profit) -> TradeOutcome:
    R = state.reserves
    buy = B > R
    sell = B < R
    delta_in = np.where(buy, (B - R) / state.gamma, 0.0)
    delta_out = np.where(sell, R - B, 0.0)
    volume = float(delta_out @ prices)
    return TradeOutcome(True, delta_in, delta_out, float(profit), volume)


def optimal_arb_trade(state: PoolState, prices: np.ndarray) -> TradeOutcome:
    """Profit-maximising arbitrage trade against the pool at market prices.

    The null trade is always feasible, so the reported profit is >= 0;
    ``executed`` is True whenever the optimum is a non-null trade.
    """
    p = np.asarray(prices, dtype=np.float64)
    B, profit = kernels.arb_solve(state.reserves, state.weights, p, state.gamma)
    if profit <= 0.0:
        zeros = np.zeros_like(state.reserves)
        return TradeOutcome(False, zeros, zeros.copy(), 0.0, 0.0)
    drift = abs(state.weights @ np.log(B) - state.weights @ np.log(state.reserves))
    if drift > 1e-9:
        raise AmmError(
            f"arbitrage solve left the invariant surface (log drift {drift:.3e}; "
            f"reserves {state.reserves}, prices {p}, gamma {state.gamma})"
        )
    return _outcome_from_solution(state, p, B, profit)


def no_arb_check(state: PoolState, prices: np.ndarray) -> bool:
    """True iff no profitable arbitrage exists before gas.

    Pairwise form: every quoted ratio (w_i R_j)/(w_j R_i) is within
    [gamma, 1/gamma] of the market ratio p_i/p_j.
    """
    q = np.asarray(prices, dtype=np.float64) * state.reserves / state.weights
    return bool(state.gamma * q.max() <= q.min())


def apply_trade(state: PoolState, outcome: TradeOutcome) -> PoolState:
    """Pool reserves after a trade: full inflow kept, outflow paid out."""
    if not outcome.executed:
        return state
    return replace(state, reserves=state.reserves + outcome.delta_in - outcome.delta_out)


def apply_noise_income(
    state: PoolState, prices: np.ndarray, arb_volume_usd: float, arb: ArbParams
) -> PoolState:
    """Credit noise-trader fee income (1-gamma)*nu*volume to the pool.

    The income buys reserves at market prices in proportion to the current
    weights, so pool value rises by exactly the fee income.
    """
    if arb_volume_usd < 0:
        raise AmmError("arb_volume_usd must be non-negative")
    fee_income = (1.0 - state.gamma) * arb.noise_multiplier * arb_volume_usd
    if fee_income == 0.0:
        return state
    p = np.asarray(prices, dtype=np.float64)
    return replace(state, reserves=state.reserves + state.weights * fee_income / p)


@dataclass
class OpportunityQueue:
    """At most one pending arbitrage opportunity, tagged by execution step."""

    execute_at: int | None = None

    @property
    def pending(self) -> bool:
        return self.execute_at is not None


def step_pool(
    state: PoolState,
    weights_row: np.ndarray,
    prices: np.ndarray,
    arb: ArbParams,
    queue: OpportunityQueue,
    step: int,
) -> tuple[PoolState, TradeOutcome]:
    """One simulation step: weight update, discovery-delayed arbitrage.

    Reference implementation of the per-step semantics; ``run_pool`` runs
    the same logic through the compiled kernel.  A weight update never
    moves reserves; only executed trades do.
    """
    state = replace(state, weights=np.asarray(weights_row, dtype=np.float64))
    null = TradeOutcome(
        False, np.zeros_like(state.reserves), np.zeros_like(state.reserves), 0.0, 0.0
    )
    if queue.pending:
        if step != queue.execute_at:
            return state, null
        queue.execute_at = None
        outcome = optimal_arb_trade(state, prices)
        if outcome.arb_profit_usd <= arb.gas_cost_usd:
            return state, null
        state = apply_trade(state, outcome)
        state = apply_noise_income(state, prices, outcome.volume_usd, arb)
        return state, outcome
    outcome = optimal_arb_trade(state, prices)
    if outcome.arb_profit_usd <= arb.gas_cost_usd:
        return state, null
    if arb.discovery_delay_steps == 0:
        state = apply_trade(state, outcome)
        state = apply_noise_income(state, prices, outcome.volume_usd, arb)
        return state, outcome
    queue.execute_at = step + arb.discovery_delay_steps
    return state, null


@dataclass(frozen=True)
class PoolRun:
    """Per-step arrays from a full pool simulation."""

    values: np.ndarray
    executed: np.ndarray
    arb_profit_usd: np.ndarray
    arb_volume_usd: np.ndarray
    k_before: np.ndarray
    k_after: np.ndarray
    noise_income_usd: np.ndarray
    final_reserves: np.ndarray

    @property
    def total_volume_usd(self) -> float:
        return float(self.arb_volume_usd.sum())


def initial_reserves(
    weights_row: np.ndarray, prices_row: np.ndarray, initial_value: float
) -> np.ndarray:
    """Reserves holding ``initial_value`` split per the first weight row."""
    return np.asarray(weights_row) * initial_value / np.asarray(prices_row)


def run_pool(
    series: PriceSeries,
    trajectory: WeightTrajectory,
    initial_value: float,
    gamma: float,
    arb: ArbParams,
    record_invariant: bool = False,
) -> PoolRun:
    """Simulate the pool over the whole series via the compiled kernel."""
    if trajectory.n_steps != series.n_steps:
        raise AmmError("trajectory and series lengths differ")
    R0 = initial_reserves(trajectory.weights[0], series.prices[0], initial_value)
    out = kernels.amm_loop(
        series.prices,
        trajectory.weights,
        R0,
        float(gamma),
        float(arb.gas_cost_usd),
        int(arb.discovery_delay_steps),
        float(arb.noise_multiplier),
        bool(record_invariant),
    )
    return PoolRun(*out)
