"""Simulation engine benchmarking AMM-pool execution against CEX rebalancing."""

from .amm import (
    ArbParams,
    PoolState,
    TradeOutcome,
    aligned_reserves,
    apply_noise_income,
    invariant_k,
    no_arb_check,
    optimal_arb_trade,
    pool_value,
    run_pool,
    step_pool,
)
from .bench import RunSummary, lvr_reference, rvr, summarize
from .cex import CexCostParams, CexState, commission_cost, run_cex, solve_rebalance, spread_cost
from .market_data import GbmSpec, PriceSeries, generate_gbm, load_price_csv, save_price_csv
from .strategy import (
    StrategyParams,
    WeightTrajectory,
    build_trajectory,
    clamp_normalize,
    ewma_log_gradient,
    momentum_target,
)
from .sweep import BaseRunConfig, SweepGrid, run_cell, run_grid

__version__ = "0.1.0"
