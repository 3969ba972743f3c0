"""Command-line entry point: simulate, sweep, cube, emit-figure-data."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .amm import ArbParams, run_pool
from .bench import SUMMARY_COLUMNS, lvr_reference, summarize
from .cex import CexCostParams, run_cex
from .config import ConfigError, RunConfig, load_config
from .market_data import MarketDataError
from .strategy import StrategyParams, build_trajectory
from .sweep import BaseRunConfig, SweepGrid, SweepError, run_grid


def _base_run_config(cfg: RunConfig) -> BaseRunConfig:
    return BaseRunConfig(
        strategy_kind=cfg.strategy_kind,
        base_weights=cfg.base_weights,
        min_weight=cfg.min_weight,
        rebalance_interval=cfg.rebalance_interval,
        interpolation_steps=cfg.interpolation_steps,
        spreads=tuple(s / 1e4 for s in cfg.spreads_bps),
        discovery_delay_steps=cfg.discovery_delay_steps,
        initial_value_usd=cfg.initial_value_usd,
    )


def _write_config_echo(cfg: RunConfig, out_dir: str) -> None:
    with open(os.path.join(out_dir, "effective_config.ini"), "w") as fh:
        fh.write(cfg.to_ini())


def _r(x) -> str:
    return repr(float(x))


def cmd_simulate(cfg: RunConfig, out_dir: str, dump_weights: bool = False) -> int:
    """Single run: pool, CEX and frictionless reference value series."""
    series = cfg.load_series()
    params = StrategyParams(
        kind=cfg.strategy_kind,
        base_weights=np.asarray(cfg.base_weights),
        memory_days=cfg.memory_days,
        aggressiveness_k=cfg.k,
        min_weight=cfg.min_weight,
        rebalance_interval=cfg.rebalance_interval,
        interpolation_steps=cfg.interpolation_steps,
    )
    traj = build_trajectory(params, series)
    pool = run_pool(
        series,
        traj,
        cfg.initial_value_usd,
        cfg.gamma,
        ArbParams(cfg.gas_usd, cfg.discovery_delay_steps, cfg.noise_multiplier),
        record_invariant=True,
    )
    costs = CexCostParams(cfg.tau_cex_bps / 1e4, np.asarray(cfg.spreads_bps) / 1e4)
    cexr = run_cex(series, traj, costs, cfg.initial_value_usd)
    lvr = lvr_reference(series, traj, cfg.initial_value_usd)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "series.csv"), "w") as fh:
        fh.write("step,V_pool,V_cex,V_lvr\n")
        for t in range(series.n_steps):
            fh.write(f"{t},{_r(pool.values[t])},{_r(cexr.values[t])},{_r(lvr[t])}\n")
    with open(os.path.join(out_dir, "trades.csv"), "w") as fh:
        fh.write("step,executed,profit_usd,volume_usd,k_before,k_after,V_pool\n")
        for t in range(series.n_steps):
            fh.write(
                f"{t},{int(pool.executed[t])},{_r(pool.arb_profit_usd[t])},"
                f"{_r(pool.arb_volume_usd[t])},{_r(pool.k_before[t])},"
                f"{_r(pool.k_after[t])},{_r(pool.values[t])}\n"
            )
    with open(os.path.join(out_dir, "cex_steps.csv"), "w") as fh:
        fh.write("step,V_cex,cost_fees,cost_spread,turnover_usd\n")
        for t in range(series.n_steps):
            fh.write(
                f"{t},{_r(cexr.values[t])},{_r(cexr.cost_fees[t])},"
                f"{_r(cexr.cost_spread[t])},{_r(cexr.turnover_usd[t])}\n"
            )
    if dump_weights:
        with open(os.path.join(out_dir, "weights.csv"), "w") as fh:
            labels = ",".join(f"w_{i + 1}" for i in range(series.n_assets))
            fh.write(f"step,{labels}\n")
            for t in range(series.n_steps):
                row = ",".join(_r(x) for x in traj.weights[t])
                fh.write(f"{t},{row}\n")
    summary = summarize(
        0,
        cfg.memory_days,
        cfg.k,
        cfg.gamma,
        cfg.gas_usd,
        cfg.tau_cex_bps / 1e4,
        cfg.noise_multiplier,
        pool.values,
        cexr.values,
        lvr,
        pool.total_volume_usd,
        series.step_seconds,
    )
    with open(os.path.join(out_dir, "summary.csv"), "w") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        fh.write(summary.csv_row() + "\n")
    _write_config_echo(cfg, out_dir)
    print(f"simulate: {series.n_steps} steps, outputs in {out_dir}")
    return 0


def _strategy_grid(cfg: RunConfig) -> SweepGrid:
    if not cfg.memory_days_values or not cfg.k_values:
        raise ConfigError("sweep requires non-empty memory_days_values and k_values")
    return SweepGrid(
        memory_days_values=cfg.memory_days_values,
        k_values=cfg.k_values,
        gamma_values=(cfg.gamma,),
        gas_values=(cfg.gas_usd,),
        tau_cex_values=(cfg.tau_cex_bps / 1e4,),
        nu_values=(cfg.noise_multiplier,),
    )


def _cube_grid(cfg: RunConfig) -> SweepGrid:
    if not (cfg.gamma_fee_bps_values and cfg.gas_usd_values and cfg.tau_cex_bps_values):
        raise ConfigError(
            "cube requires non-empty gamma_fee_bps_values, gas_usd_values "
            "and tau_cex_bps_values"
        )
    return SweepGrid(
        memory_days_values=(cfg.memory_days,),
        k_values=(cfg.k,),
        gamma_values=tuple(1.0 - b / 1e4 for b in cfg.gamma_fee_bps_values),
        gas_values=cfg.gas_usd_values,
        tau_cex_values=tuple(b / 1e4 for b in cfg.tau_cex_bps_values),
        nu_values=cfg.nu_values or (cfg.noise_multiplier,),
    )


def _run_grid_command(cfg: RunConfig, grid: SweepGrid, out_dir: str, name: str, workers: int) -> int:
    series = cfg.load_series()
    base = _base_run_config(cfg)
    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, f"{name}.csv")
    print(f"{name}: {grid.size} cells on {series.n_steps} steps, {workers} worker(s)")
    start = time.time()
    run_grid(series, base, grid, workers=workers, out_path=out_path)
    _write_config_echo(cfg, out_dir)
    print(f"{name}: wrote {grid.size} rows to {out_path} in {time.time() - start:.1f}s")
    return 0


def cmd_sweep(cfg: RunConfig, out_dir: str, workers: int) -> int:
    """Strategy grid (memory x aggressiveness) at fixed cost parameters."""
    return _run_grid_command(cfg, _strategy_grid(cfg), out_dir, "sweep", workers)


def cmd_cube(cfg: RunConfig, out_dir: str, workers: int) -> int:
    """Cost cube (pool fee x gas x CEX fee) at a fixed strategy."""
    return _run_grid_command(cfg, _cube_grid(cfg), out_dir, "cube", workers)


def cmd_emit_figure_data(cfg: RunConfig, out_dir: str, workers: int) -> int:
    """One bundle of figure-ready CSVs: run series, strategy sweep, cost cube."""
    rc = cmd_simulate(cfg, os.path.join(out_dir, "run"))
    if rc == 0 and cfg.memory_days_values and cfg.k_values:
        rc = _run_grid_command(cfg, _strategy_grid(cfg), out_dir, "sweep", workers)
    if rc == 0 and cfg.gamma_fee_bps_values and cfg.gas_usd_values and cfg.tau_cex_bps_values:
        rc = _run_grid_command(cfg, _cube_grid(cfg), out_dir, "cube", workers)
    return rc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvrsim",
        description="Benchmark AMM-pool strategy execution against CEX rebalancing",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "cube", "emit-figure-data"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="override [data] seed")
        if name == "simulate":
            p.add_argument("--dump-weights", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        out_dir = args.out if args.out is not None else "rvrsim_out"
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir, dump_weights=args.dump_weights)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir, args.workers)
        if args.command == "cube":
            return cmd_cube(cfg, out_dir, args.workers)
        return cmd_emit_figure_data(cfg, out_dir, args.workers)
    except (ConfigError, MarketDataError, SweepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
