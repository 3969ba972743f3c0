import numpy as np
import pytest

from rvrsim.market_data import (
    GbmSpec,
    MarketDataError,
    PriceSeries,
    generate_gbm,
    load_price_csv,
    save_price_csv,
)

from conftest import make_gbm


def write_csv(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadPriceCsv:
    def test_three_row_parse(self, tmp_path):
        path = write_csv(
            tmp_path,
            "timestamp,BTC,ETH,DAI\n0,40000,2500,1.0\n60,40010,2499,1.0\n120,40020,2510,0.999\n",
        )
        series = load_price_csv(path)
        assert series.n_steps == 3
        assert series.n_assets == 3
        assert series.asset_labels == ("BTC", "ETH", "DAI")
        assert series.prices[2, 1] == 2510.0

    def test_zero_price_names_row(self, tmp_path):
        rows = ["timestamp,A,B"] + [f"{60 * i},100,1" for i in range(10)]
        rows[6] = "300,0,1"  # line 7 of the file
        path = write_csv(tmp_path, "\n".join(rows) + "\n")
        with pytest.raises(MarketDataError, match="line 7"):
            load_price_csv(path)

    def test_non_uniform_spacing(self, tmp_path):
        path = write_csv(tmp_path, "timestamp,A,B\n0,1,2\n60,1,2\n180,1,2\n")
        with pytest.raises(MarketDataError, match="spacing"):
            load_price_csv(path)

    def test_malformed_number_names_line(self, tmp_path):
        path = write_csv(tmp_path, "timestamp,A,B\n0,1,2\n60,x,2\n120,1,2\n")
        with pytest.raises(MarketDataError, match="line 3"):
            load_price_csv(path)

    def test_label_mismatch(self, tmp_path):
        path = write_csv(tmp_path, "timestamp,A,B\n0,1,2\n60,1,2\n")
        with pytest.raises(MarketDataError, match="labels"):
            load_price_csv(path, expected_assets=("BTC", "ETH"))

    def test_roundtrip_bit_exact(self, tmp_path):
        series = make_gbm(3, steps=50, seed=3)
        path = tmp_path / "out.csv"
        save_price_csv(series, path)
        first = path.read_bytes()
        back = load_price_csv(path)
        assert np.array_equal(back.prices, series.prices)
        assert np.array_equal(back.timestamps, series.timestamps)
        save_price_csv(back, path)
        assert path.read_bytes() == first


class TestPriceSeriesInvariants:
    def test_requires_two_assets(self):
        with pytest.raises(MarketDataError):
            PriceSeries(np.array([0, 60]), np.array([[1.0], [1.0]]), ("A",))

    def test_rejects_nonpositive(self):
        with pytest.raises(MarketDataError):
            PriceSeries(np.array([0, 60]), np.array([[1.0, 2.0], [1.0, -2.0]]), ("A", "B"))

    def test_immutable(self, gbm3):
        with pytest.raises(ValueError):
            gbm3.prices[0, 0] = 5.0


class TestGenerateGbm:
    def test_zero_vol_constant(self):
        series = make_gbm(2, steps=100, vol=[0.0, 0.0])
        assert np.allclose(series.prices, series.prices[0], rtol=0, atol=0)

    def test_same_seed_identical(self):
        a = make_gbm(3, steps=500, seed=21)
        b = make_gbm(3, steps=500, seed=21)
        assert np.array_equal(a.prices, b.prices)

    def test_different_seed_differs(self):
        a = make_gbm(3, steps=500, seed=21)
        b = make_gbm(3, steps=500, seed=22)
        assert not np.array_equal(a.prices, b.prices)

    def test_sample_vol_converges(self):
        series = make_gbm(2, steps=100_001, seed=5, vol=[0.01, 0.01])
        incr = np.diff(np.log(series.prices), axis=0)
        std = incr.std(axis=0)
        assert np.all(np.abs(std / 0.01 - 1.0) < 0.02)

    def test_identity_corr_uncorrelated(self):
        series = make_gbm(2, steps=100_001, seed=9, vol=[0.01, 0.01])
        incr = np.diff(np.log(series.prices), axis=0)
        n = incr.shape[0]
        rho = np.corrcoef(incr.T)[0, 1]
        assert abs(rho) < 3.0 / np.sqrt(n)

    def test_correlated_draws(self):
        corr = np.array([[1.0, 0.8], [0.8, 1.0]])
        series = make_gbm(2, steps=50_001, seed=9, vol=[0.01, 0.01], corr=corr)
        incr = np.diff(np.log(series.prices), axis=0)
        assert abs(np.corrcoef(incr.T)[0, 1] - 0.8) < 0.02

    def test_non_psd_rejected(self):
        corr = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(MarketDataError, match="semi-definite"):
            GbmSpec(
                initial_prices=np.array([1.0, 1.0]),
                drifts=np.zeros(2),
                volatilities=np.array([0.01, 0.01]),
                correlation=corr,
                steps=10,
                seed=0,
            )

    def test_drift_applied(self):
        series = make_gbm(2, steps=1000, vol=[0.0, 0.0], drift=[0.001, -0.001])
        logret = np.log(series.prices[-1] / series.prices[0])
        assert np.allclose(logret, [0.999, -0.999], rtol=1e-9)
