"""Deterministic parameter-sweep harness over simulation cells.

One cell = one full pool + CEX + reference simulation for a single
parameter combination.  Cells are independent; output rows are always in
lexicographic cell order regardless of worker count.
"""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .amm import ArbParams, run_pool
from .bench import SUMMARY_COLUMNS, RunSummary, lvr_reference, summarize
from .cex import CexCostParams, run_cex
from .market_data import PriceSeries
from .strategy import StrategyParams, build_trajectory


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class BaseRunConfig:
    """Per-run settings shared by every cell of a grid."""

    strategy_kind: str
    base_weights: tuple
    min_weight: float
    rebalance_interval: int
    interpolation_steps: int
    spreads: tuple
    discovery_delay_steps: int
    initial_value_usd: float


class Cell(NamedTuple):
    index: int
    strategy_id: int
    memory_days: float
    k: float
    gamma: float
    gas_usd: float
    tau_cex: float
    nu: float


@dataclass(frozen=True)
class SweepGrid:
    memory_days_values: tuple
    k_values: tuple
    gamma_values: tuple
    gas_values: tuple
    tau_cex_values: tuple
    nu_values: tuple

    def __post_init__(self):
        for name in (
            "memory_days_values",
            "k_values",
            "gamma_values",
            "gas_values",
            "tau_cex_values",
            "nu_values",
        ):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise SweepError(f"grid axis {name} is empty")
            object.__setattr__(self, name, vals)

    @property
    def size(self) -> int:
        return (
            len(self.memory_days_values)
            * len(self.k_values)
            * len(self.gamma_values)
            * len(self.gas_values)
            * len(self.tau_cex_values)
            * len(self.nu_values)
        )

    def cells(self) -> Iterator[Cell]:
        """Lexicographic order: memory, k, gamma, gas, tau, nu."""
        idx = 0
        sid = 0
        for mem in self.memory_days_values:
            for k in self.k_values:
                for gamma in self.gamma_values:
                    for gas in self.gas_values:
                        for tau in self.tau_cex_values:
                            for nu in self.nu_values:
                                yield Cell(idx, sid, mem, k, gamma, gas, tau, nu)
                                idx += 1
                sid += 1


class _LruCache:
    """Tiny bounded cache; grid cells visit shared keys consecutively."""

    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: dict = {}

    def get_or_compute(self, key, compute):
        if key in self._data:
            value = self._data.pop(key)
        else:
            value = compute()
        self._data[key] = value
        while len(self._data) > self.maxsize:
            self._data.pop(next(iter(self._data)))
        return value

    def clear(self):
        self._data.clear()


# per-process caches; within one grid the AMM leg only depends on
# (strategy, gamma, gas, nu) and the CEX leg on (strategy, tau)
_TRAJ_CACHE = _LruCache(4)
_AUX_CACHE = _LruCache(32)
_WORKER_STATE: dict = {}


def _clear_caches():
    _TRAJ_CACHE.clear()
    _AUX_CACHE.clear()


def _trajectory_for(series: PriceSeries, base: BaseRunConfig, cell: Cell):
    def compute():
        params = StrategyParams(
            kind=base.strategy_kind,
            base_weights=np.asarray(base.base_weights),
            memory_days=cell.memory_days,
            aggressiveness_k=cell.k,
            min_weight=base.min_weight,
            rebalance_interval=base.rebalance_interval,
            interpolation_steps=base.interpolation_steps,
        )
        return build_trajectory(params, series)

    return _TRAJ_CACHE.get_or_compute((cell.memory_days, cell.k), compute)


def run_cell(series: PriceSeries, base: BaseRunConfig, cell: Cell) -> RunSummary:
    """Simulate one cell; bit-reproducible for fixed inputs."""
    try:
        traj = _trajectory_for(series, base, cell)

        def compute_pool():
            run = run_pool(
                series,
                traj,
                base.initial_value_usd,
                cell.gamma,
                ArbParams(cell.gas_usd, base.discovery_delay_steps, cell.nu),
            )
            return run.values, run.total_volume_usd

        def compute_cex():
            return run_cex(
                series,
                traj,
                CexCostParams(cell.tau_cex, np.asarray(base.spreads)),
                base.initial_value_usd,
            ).values

        def compute_lvr():
            return lvr_reference(series, traj, base.initial_value_usd)

        pool_values, pool_volume = _AUX_CACHE.get_or_compute(
            ("pool", cell.memory_days, cell.k, cell.gamma, cell.gas_usd, cell.nu),
            compute_pool,
        )
        cex_values = _AUX_CACHE.get_or_compute(
            ("cex", cell.memory_days, cell.k, cell.tau_cex), compute_cex
        )
        lvr = _AUX_CACHE.get_or_compute(("lvr", cell.memory_days, cell.k), compute_lvr)
        return summarize(
            cell.strategy_id,
            cell.memory_days,
            cell.k,
            cell.gamma,
            cell.gas_usd,
            cell.tau_cex,
            cell.nu,
            pool_values,
            cex_values,
            lvr,
            pool_volume,
            series.step_seconds,
        )
    except Exception as exc:
        raise SweepError(f"cell {cell.index} {cell[2:]} failed: {exc}") from exc


def _init_worker(series, base):
    _WORKER_STATE["series"] = series
    _WORKER_STATE["base"] = base
    _clear_caches()


def _run_cell_worker(cell: Cell) -> tuple[int, RunSummary]:
    return cell.index, run_cell(_WORKER_STATE["series"], _WORKER_STATE["base"], cell)


def write_summary_csv(rows: Sequence[RunSummary], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(row.csv_row() + "\n")


def run_grid(
    series: PriceSeries,
    base: BaseRunConfig,
    grid: SweepGrid,
    workers: int = 1,
    out_path=None,
    flush_every: int = 200,
    progress=None,
) -> list[RunSummary]:
    """Run every Cartesian cell of the grid.

    Results come back in deterministic lexicographic cell order no matter
    how many workers run; when ``out_path`` is given, completed prefixes
    are flushed to ``<out_path>.partial`` every ``flush_every`` cells and
    the final CSV replaces the partial file.
    """
    cells = list(grid.cells())
    results: list = [None] * len(cells)
    partial_path = f"{out_path}.partial" if out_path is not None else None

    def flush_partial(done_prefix: int):
        if partial_path is None:
            return
        write_summary_csv(results[:done_prefix], partial_path)

    done = 0
    if workers <= 1:
        _clear_caches()
        for cell in cells:
            results[cell.index] = run_cell(series, base, cell)
            done += 1
            if progress is not None:
                progress(done, len(cells))
            if partial_path is not None and done % flush_every == 0:
                flush_partial(done)
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(
            max_workers=workers,
            mp_context=ctx,
            initializer=_init_worker,
            initargs=(series, base),
        ) as pool:
            prefix = 0
            for idx, summary in pool.map(_run_cell_worker, cells, chunksize=8):
                results[idx] = summary
                done += 1
                if progress is not None:
                    progress(done, len(cells))
                while prefix < len(cells) and results[prefix] is not None:
                    prefix += 1
                if partial_path is not None and done % flush_every == 0:
                    flush_partial(prefix)
    if out_path is not None:
        write_summary_csv(results, out_path)
        if partial_path is not None and os.path.exists(partial_path):
            os.remove(partial_path)
    return results
