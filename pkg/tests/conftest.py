import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rvrsim.market_data import GbmSpec, generate_gbm
from rvrsim.strategy import StrategyParams, build_trajectory


def make_gbm(n_assets=3, steps=3000, seed=7, vol=None, drift=None, corr=None):
    if vol is None:
        vol = [0.0008, 0.001, 0.00002][:n_assets]
    if drift is None:
        drift = [0.0] * n_assets
    p0 = [40000.0, 2500.0, 1.0][:n_assets]
    spec = GbmSpec(
        initial_prices=np.asarray(p0),
        drifts=np.asarray(drift, float),
        volatilities=np.asarray(vol, float),
        correlation=np.eye(n_assets) if corr is None else np.asarray(corr),
        steps=steps,
        seed=seed,
    )
    return generate_gbm(spec)


def momentum_params(n_assets=3, **kwargs):
    base = {2: np.array([0.5, 0.5]), 3: np.array([0.3, 0.6, 0.1])}[n_assets]
    defaults = dict(
        kind="momentum",
        base_weights=base,
        memory_days=0.5,
        aggressiveness_k=400.0,
        min_weight=0.03,
        rebalance_interval=60,
        interpolation_steps=60,
    )
    defaults.update(kwargs)
    return StrategyParams(**defaults)


@pytest.fixture(scope="session")
def gbm3():
    return make_gbm(3, steps=3000, seed=7)


@pytest.fixture(scope="session")
def gbm2():
    return make_gbm(2, steps=2000, seed=11)


@pytest.fixture(scope="session")
def traj3(gbm3):
    return build_trajectory(momentum_params(3), gbm3)
