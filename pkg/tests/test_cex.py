import numpy as np
import pytest

from rvrsim.bench import lvr_reference
from rvrsim.cex import (
    CexCostParams,
    CexError,
    CexState,
    commission_cost,
    run_cex,
    solve_rebalance,
    spread_cost,
)
from rvrsim.strategy import WeightTrajectory, build_trajectory

from conftest import make_gbm, momentum_params
from oracles import cex_value_bisection_oracle


class TestCommissionCost:
    def test_no_trade_zero(self):
        old = np.array([1.0, 2.0])
        assert commission_cost(old, old, np.array([3.0, 4.0]), 0.001) == 0.0

    def test_zero_rate_free(self):
        assert commission_cost([1, 2], [5, 0], [3.0, 4.0], 0.0) == 0.0

    def test_buy_leg_only(self):
        # buy 10 units at 100, sell elsewhere: only the buy leg pays
        cost = commission_cost([0.0, 20.0], [10.0, 5.0], [100.0, 1.0], 0.001)
        assert cost == pytest.approx(1.0, rel=1e-15)


class TestSpreadCost:
    def test_zero_spread(self):
        assert spread_cost([1, 2], [3, 0], [10.0, 10.0], [0.0, 0.0]) == 0.0

    def test_half_spread_formula(self):
        cost = spread_cost([0.0, 5.0], [10.0, 5.0], [100.0, 1.0], [0.001, 0.0])
        assert cost == pytest.approx(0.5, rel=1e-15)

    def test_direction_symmetric(self):
        p = np.array([100.0, 1.0])
        s = np.array([0.001, 0.002])
        fwd = spread_cost([0.0, 500.0], [5.0, 0.0], p, s)
        back = spread_cost([5.0, 0.0], [0.0, 500.0], p, s)
        assert fwd == back


class TestSolveRebalance:
    def test_zero_costs_frictionless(self):
        st = CexState(np.array([1.0, 100.0]), 200.0)
        p = np.array([100.0, 1.0])
        costs = CexCostParams(0.0, np.zeros(2))
        new, trade, cost = solve_rebalance(st, np.array([0.6, 0.4]), p, costs)
        assert new.value == pytest.approx(200.0, rel=1e-15)
        assert cost == 0.0
        assert np.allclose(new.reserves * p / new.value, [0.6, 0.4], rtol=1e-12)

    def test_already_balanced_no_cost(self):
        st = CexState(np.array([1.0, 100.0]), 200.0)
        p = np.array([100.0, 1.0])
        costs = CexCostParams(0.002, np.array([0.001, 0.001]))
        new, trade, cost = solve_rebalance(st, np.array([0.5, 0.5]), p, costs)
        assert cost == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(trade, 0.0, atol=1e-12)

    def test_matches_bisection_oracle(self):
        st = CexState(np.array([1.0, 100.0]), 200.0)
        p = np.array([100.0, 1.0])
        costs = CexCostParams(0.001, np.zeros(2))
        new, trade, cost = solve_rebalance(st, np.array([0.6, 0.4]), p, costs)
        ref = cex_value_bisection_oracle(st.reserves, np.array([0.6, 0.4]), p, 0.001, np.zeros(2))
        assert new.value == pytest.approx(ref, rel=1e-10)
        # residual of the fixed point
        assert abs(new.value + cost - 200.0) <= 1e-9 * new.value

    def test_random_instances_match_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            n = int(rng.integers(2, 5))
            R = np.exp(rng.normal(0, 1, n))
            p = np.exp(rng.normal(0, 1, n))
            w = rng.dirichlet(np.ones(n))
            w = np.clip(w, 0.03, 0.9)
            w = w / w.sum()
            tau = float(rng.uniform(0, 0.01))
            s = rng.uniform(0, 0.005, n)
            st = CexState(R, float(R @ p))
            new, trade, cost = solve_rebalance(st, w, p, CexCostParams(tau, s))
            ref = cex_value_bisection_oracle(R, w, p, tau, s)
            assert new.value == pytest.approx(ref, rel=1e-9)
            assert cost >= 0.0
            # value accounting: drop from mark-to-market equals the cost
            assert new.value - float(R @ p) == pytest.approx(-cost, rel=1e-9, abs=1e-9)

    def test_cost_monotone_in_rates(self):
        st = CexState(np.array([1.0, 100.0]), 200.0)
        p = np.array([100.0, 1.0])
        target = np.array([0.7, 0.3])
        prev = -1.0
        for tau in (0.0, 0.0005, 0.001, 0.002):
            _, _, cost = solve_rebalance(st, target, p, CexCostParams(tau, np.zeros(2)))
            assert cost > prev
            prev = cost
        prev = -1.0
        for sp in (0.0, 0.0005, 0.001):
            _, _, cost = solve_rebalance(
                st, target, p, CexCostParams(0.0, np.array([sp, sp]))
            )
            assert cost >= prev
            prev = cost


class TestRunCex:
    def test_constant_everything_constant_value(self):
        from rvrsim.market_data import PriceSeries

        T = 50
        series = PriceSeries(np.arange(T) * 60, np.full((T, 2), 2.0), ("A", "B"))
        traj = WeightTrajectory(np.tile([0.5, 0.5], (T, 1)), 0.03)
        run = run_cex(series, traj, CexCostParams(0.001, np.array([0.001, 0.001])), 1e6)
        assert np.allclose(run.values, 1e6, rtol=1e-12)

    def test_zero_costs_equals_lvr_reference(self, gbm3, traj3):
        run = run_cex(gbm3, traj3, CexCostParams(0.0, np.zeros(3)), 1e7)
        lvr = lvr_reference(gbm3, traj3, 1e7)
        assert np.max(np.abs(run.values / lvr - 1.0)) <= 1e-9

    def test_higher_commission_never_better(self, gbm3, traj3):
        prev = None
        for tau in (0.0, 0.0005, 0.001, 0.002):
            run = run_cex(gbm3, traj3, CexCostParams(tau, np.zeros(3)), 1e7)
            if prev is not None:
                assert np.all(run.values <= prev + 1e-9 * 1e7)
            prev = run.values

    def test_residual_bound_reported(self, gbm3, traj3):
        run = run_cex(gbm3, traj3, CexCostParams(0.001, np.full(3, 2e-4)), 1e7)
        assert run.max_rel_residual <= 1e-9

    def test_value_accounting_identity(self, gbm3, traj3):
        run = run_cex(gbm3, traj3, CexCostParams(0.001, np.full(3, 2e-4)), 1e7)
        # V(t) = sum R(t-1) p(t) - cost(t); reconstruct mark-to-market from
        # the previous step's value and weights
        w = traj3.weights
        p = gbm3.prices
        mark = run.values[:-1] * np.sum(w[:-1] * p[1:] / p[:-1], axis=1)
        cost = run.cost_fees[1:] + run.cost_spread[1:]
        assert np.allclose(run.values[1:], mark - cost, rtol=1e-9)

    def test_invalid_params_rejected(self):
        with pytest.raises(CexError):
            CexCostParams(1.5, np.zeros(2))
        with pytest.raises(CexError):
            CexCostParams(0.001, np.array([-0.1, 0.0]))
