import numpy as np
import pytest

from Herramientas.GameErrors import ConfigError, IllegalMoveError
from Modulos.GameEngine import GameVariant, new_game, play_round
from Modulos.RealityStrategies import (
    Distribution,
    IIDSampler,
    PricePath,
    ScriptedPath,
    TargetTracking,
    load_prices,
    load_script,
    price_moves,
)


class TestScriptedPath:
    def test_exhausts(self):
        path = ScriptedPath([1.0, -1.0])
        state = new_game(GameVariant.OUFG, 1.0)
        assert [path.next_move(state, 0.0) for _ in range(3)] == [1.0, -1.0, None]

    def test_rejects_illegal_entry(self):
        with pytest.raises(IllegalMoveError):
            ScriptedPath([0.5, 2.0], GameVariant.BFG)

    def test_load_script_skips_header(self, write_csv):
        path = write_csv("x.csv", ["x", 1, -1, 0.5])
        assert load_script(path).xs == [1.0, -1.0, 0.5]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_script(str(tmp_path / "nada.csv"))


class TestIIDSampler:
    def test_same_seed_same_stream(self):
        first = IIDSampler(Distribution.RADEMACHER, seed=5).sample(5000)
        second = IIDSampler(Distribution.RADEMACHER, seed=5).sample(5000)
        np.testing.assert_array_equal(first, second)
        assert set(np.unique(first)) == {-1.0, 1.0}

    def test_different_seeds_differ(self):
        first = IIDSampler(Distribution.RADEMACHER, seed=1).sample(200)
        second = IIDSampler(Distribution.RADEMACHER, seed=2).sample(200)
        assert not np.array_equal(first, second)

    def test_shifted_support(self):
        xs = IIDSampler(Distribution.SHIFTED_RADEMACHER, seed=0, delta=0.25).sample(100)
        assert set(np.unique(xs)) <= {-0.75, 1.25}

    def test_uniform_support(self):
        xs = IIDSampler(Distribution.UNIFORM, seed=0, upper=3.0).sample(1000)
        assert xs.min() >= -1.0 and xs.max() <= 3.0

    def test_shifted_needs_bounded_game_check(self):
        with pytest.raises(IllegalMoveError):
            IIDSampler(Distribution.SHIFTED_RADEMACHER, seed=0, variant=GameVariant.BFG, delta=0.1)
        with pytest.raises(IllegalMoveError):
            IIDSampler(Distribution.SHIFTED_RADEMACHER, seed=0, delta=-0.1)


class TestTargetTracking:
    def test_linear_drift_follows_target(self):
        reality = TargetTracking("linear", 0.1)
        state = new_game(GameVariant.OUFG, 1.0)
        for _ in range(1000):
            state, _ = play_round(state, 0.0, reality.next_move(state, 0.0))
        assert state.S / state.A == pytest.approx(0.1, abs=2e-3)

    def test_lil_target_level(self):
        reality = TargetTracking("lil", 1.2)
        assert reality.level(1.0) == 0.0
        assert reality.level(100.0) == pytest.approx((1.2 * 100.0 * np.log(100.0)) ** 0.5)

    def test_rejects(self):
        with pytest.raises(ConfigError):
            TargetTracking("cuadratica", 1.0)
        with pytest.raises(ConfigError):
            TargetTracking("linear", 0.0)


class TestPrices:
    def test_moves(self):
        assert price_moves([100.0, 110.0, 55.0]) == pytest.approx([0.1, -0.5])
        assert price_moves([2.0, 0.0]) == [-1.0]

    def test_rejects(self):
        with pytest.raises(ConfigError):
            price_moves([1.0])
        with pytest.raises(ConfigError):
            price_moves([1.0, 0.0, 2.0])

    def test_load_prices(self, write_csv):
        path = write_csv("p.csv", ["precio", 10, 12, 9])
        prices = load_prices(path)
        assert isinstance(prices, PricePath)
        assert prices.xs == pytest.approx([0.2, -0.25])
