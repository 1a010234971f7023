import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Herramientas.GameErrors import GameError, IllegalMoveError, IllegalStakeError
from Modulos.GameEngine import (
    COLLATERAL_VIOLATION,
    GameVariant,
    new_game,
    play_round,
    replay,
    self_normalized_stats,
)


class TestVariant:
    def test_ranges(self):
        assert GameVariant.OUFG.move_range == (-1.0, math.inf)
        assert GameVariant.BFG.move_range == (-1.0, 1.0)
        assert GameVariant.OUFG.proportion_range == (0.0, 1.0)
        assert GameVariant.BFG.proportion_range == (-1.0, 1.0)

    def test_parse(self):
        assert GameVariant.parse(" bfg ") is GameVariant.BFG
        with pytest.raises(IllegalMoveError):
            GameVariant.parse("otro")


class TestPlayRound:
    def test_single_round(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, record = play_round(state, 0.5, 1.0)
        assert (state.n, state.S, state.A, state.K) == (1, 1.0, 1.0, 1.5)
        assert record.eps == 0.5
        assert record.proportion_legal

    def test_two_rounds(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, _ = play_round(state, 0.5, 1.0)
        state, _ = play_round(state, 0.75, -1.0)
        assert state.S == 0.0
        assert state.A == 2.0
        assert state.K == pytest.approx(0.75)

    def test_zero_stake_keeps_capital(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, _ = play_round(state, 0.0, 1000.0)
        assert state.K == 1.0
        assert state.A == 1e6

    @pytest.mark.parametrize("x", [-1.5, math.nan, math.inf])
    def test_illegal_move_oufg(self, x):
        with pytest.raises(IllegalMoveError):
            play_round(new_game(GameVariant.OUFG, 1.0), 0.1, x)

    def test_illegal_move_bfg(self):
        with pytest.raises(IllegalMoveError):
            play_round(new_game(GameVariant.BFG, 1.0), 0.1, 1.5)

    def test_nonfinite_stake(self):
        with pytest.raises(IllegalStakeError):
            play_round(new_game(GameVariant.OUFG, 1.0), math.inf, 1.0)

    @pytest.mark.parametrize("K0", [0.0, -1.0, math.nan])
    def test_initial_capital_must_be_positive(self, K0):
        with pytest.raises(IllegalStakeError):
            new_game(GameVariant.OUFG, K0)

    def test_collateral_violation_terminates(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, record = play_round(state, 2.0, -1.0)
        assert state.K == -1.0
        assert state.verdict == COLLATERAL_VIOLATION
        assert not record.proportion_legal
        with pytest.raises(IllegalMoveError):
            play_round(state, 0.0, 1.0)

    def test_out_of_range_proportion_is_flagged(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, record = play_round(state, -0.5, -1.0)
        assert state.verdict is None
        assert state.K == 1.5
        assert not record.proportion_legal

    def test_errors_share_base(self):
        assert issubclass(IllegalMoveError, GameError)
        assert issubclass(GameError, ValueError)


class TestReplay:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(-1.0, 1.0)), max_size=40))
    def test_replay_reproduces_state(self, moves):
        state = new_game(GameVariant.BFG, 1.0)
        records = []
        for eps, x in moves:
            state, record = play_round(state, eps * max(state.K, 0.0), x)
            records.append(record)
        again = replay(GameVariant.BFG, 1.0, records)
        assert again == state

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(-1.0, 50.0)), max_size=40))
    def test_proportional_stakes_keep_capital_nonnegative(self, moves):
        state = new_game(GameVariant.OUFG, 1.0)
        for eps, x in moves:
            state, _ = play_round(state, eps * state.K, x)
            assert state.K >= 0.0


class TestSelfNormalizedStats:
    def test_undefined_before_any_move(self):
        stats = self_normalized_stats(new_game(GameVariant.OUFG, 1.0))
        assert stats.slln is None and stats.sqrtlog is None and stats.lil is None

    def test_ratios(self):
        state = new_game(GameVariant.OUFG, 1.0)
        for _ in range(20):
            state, _ = play_round(state, 0.0, 1.0)
        stats = self_normalized_stats(state)
        assert stats.slln == pytest.approx(1.0)
        assert stats.sqrtlog == pytest.approx(20.0 / math.sqrt(20.0 * math.log(20.0)))
        assert stats.lil == pytest.approx(20.0 / math.sqrt(2.0 * 20.0 * math.log(math.log(20.0))))

    def test_lil_needs_log_above_one(self):
        state = new_game(GameVariant.OUFG, 1.0)
        state, _ = play_round(state, 0.0, 1.0)
        state, _ = play_round(state, 0.0, 1.0)
        stats = self_normalized_stats(state)
        assert stats.sqrtlog is not None
        assert stats.lil is None
