import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Herramientas.GameErrors import IllegalStakeError
from Herramientas.SequenceSpec import parse_sequence
from Modulos.GameEngine import GameVariant, new_game, play_round
from Modulos.MixtureQuadrature import QuadratureSpec
from Modulos.PriorDensity import make_lil, make_power, make_uniform
from Modulos.RealityStrategies import Distribution, IIDSampler, ScriptedPath
from Modulos.SimulationService import capital_identity_gap, play_game
from Modulos.SkepticStrategies import (
    BayesMixture,
    ConstantProportion,
    DiscreteMixture,
    Kronecker,
    MixtureState,
    canonical_one_sided,
    canonical_two_sided,
)


def _play(strategy, xs, variant=GameVariant.OUFG):
    state = new_game(variant, strategy.initial_capital)
    for state, _ in play_game(strategy, ScriptedPath(xs, variant), state, len(xs)):
        pass
    return state


class TestMixtureState:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-0.9, 10.0), max_size=50))
    def test_log_products_match_direct_products(self, xs):
        eps = np.linspace(0.01, 1.0, 7)
        mixture = MixtureState(eps, np.zeros_like(eps))
        for x in xs:
            mixture.update(x)
        direct = np.prod(1.0 + np.outer(xs, eps), axis=0) if xs else np.ones_like(eps)
        np.testing.assert_allclose(mixture.node_products(), direct, rtol=1e-10)
        assert mixture.round == len(xs)

    def test_minus_one_is_absorbing_for_unit_node(self):
        mixture = MixtureState(np.array([0.5, 1.0]), np.zeros(2))
        mixture.update(-1.0)
        mixture.update(5.0)
        assert mixture.logprod[1] == -math.inf
        assert mixture.node_products()[0] == pytest.approx(0.5 * 3.5)
        assert not mixture.ruined

    def test_all_nodes_dead_is_ruin(self):
        mixture = MixtureState(np.array([1.0]), np.zeros(1))
        mixture.update(-1.0)
        assert mixture.ruined
        assert mixture.proportion() == 0.0


class TestConstantProportion:
    def test_product(self):
        state = _play(ConstantProportion(0.5), [1.0, -1.0])
        assert state.K == pytest.approx(0.75)

    def test_zero_proportion_is_identity(self):
        state = _play(ConstantProportion(0.0, initial_capital=3.0), [1.0, -1.0, 7.0])
        assert state.K == 3.0

    def test_full_proportion_hits_zero_and_stays(self):
        state = _play(ConstantProportion(1.0), [1.0, -1.0, 2.0, 3.0])
        assert state.K == 0.0
        assert state.verdict is None

    def test_rejects_out_of_range(self):
        with pytest.raises(IllegalStakeError):
            ConstantProportion(1.5)
        with pytest.raises(IllegalStakeError):
            ConstantProportion(-0.5, GameVariant.OUFG)
        assert ConstantProportion(-0.5, GameVariant.BFG).eps == -0.5


class TestDiscreteMixture:
    def test_canonical_initial_capital(self):
        mixture = canonical_one_sided()
        assert mixture.initial_capital == pytest.approx(0.5)
        assert len(list(mixture.atoms)) == 60

    def test_single_atom_reproduces_constant_proportion(self):
        xs = [1.0, -1.0, 3.0, -0.5, 0.25]
        single = _play(DiscreteMixture([(0.5, 1.0)]), xs)
        constant = _play(ConstantProportion(0.5), xs)
        assert single.K == pytest.approx(constant.K, rel=1e-12)

    def test_two_atoms_posterior_mean(self):
        mixture = DiscreteMixture([(0.5, 0.5), (0.25, 0.5)])
        mixture.observe(1.0)
        assert mixture.proportion() == pytest.approx((0.375 + 0.15625) / 1.375)

    def test_two_sided_requires_bfg(self):
        with pytest.raises(IllegalStakeError):
            canonical_two_sided(variant=GameVariant.OUFG)
        with pytest.raises(IllegalStakeError):
            DiscreteMixture([(-0.5, 1.0)], GameVariant.OUFG)
        mixture = canonical_two_sided()
        assert mixture.initial_capital == pytest.approx(1.0)
        assert mixture.proportion() == pytest.approx(0.0, abs=1e-15)

    def test_weights_must_be_positive(self):
        with pytest.raises(IllegalStakeError):
            DiscreteMixture([(0.5, 0.0)])
        with pytest.raises(IllegalStakeError):
            DiscreteMixture([])


class TestBayesMixture:
    def test_uniform_first_proportion(self):
        strategy = BayesMixture(make_uniform())
        assert strategy.initial_capital == pytest.approx(1.0, rel=1e-10)
        assert strategy.proportion() == pytest.approx(0.5, rel=1e-9)

    def test_power_first_proportion(self):
        strategy = BayesMixture(make_power(0.5))
        assert strategy.initial_capital == pytest.approx(2.0, rel=1e-10)
        assert strategy.proportion() == pytest.approx(1.0 / 3.0, rel=1e-9)

    def test_uniform_closed_form_capital(self):
        strategy = BayesMixture(make_uniform())
        state = _play(strategy, [1.0, 1.0, 1.0])
        assert state.K == pytest.approx(15.0 / 4.0, rel=1e-9)
        assert math.exp(strategy.log_integral_capital()) == pytest.approx(15.0 / 4.0, rel=1e-9)

    @pytest.mark.parametrize("prior", [make_uniform(), make_power(0.5), make_lil()],
                             ids=["uniform", "power", "lil"])
    def test_recursive_and_integral_capital_agree(self, prior):
        strategy = BayesMixture(prior)
        state = new_game(GameVariant.OUFG, strategy.initial_capital)
        reality = IIDSampler(Distribution.UNIFORM, seed=7, upper=1.5)
        for state, _ in play_game(strategy, reality, state, 1000):
            assert capital_identity_gap(strategy, state) < 1e-6
            assert 0.0 < strategy.proportion() < 1.0
            assert state.K >= 0.0

    def test_matches_discrete_mixture_on_nodes(self):
        xs = list(IIDSampler(Distribution.SHIFTED_RADEMACHER, seed=3, delta=0.1).sample(300))
        bayes = BayesMixture(make_power(0.5))
        discrete = bayes.as_discrete()
        for x in xs:
            bayes.observe(x)
            discrete.observe(x)
            assert discrete.proportion() == pytest.approx(bayes.proportion(), rel=1e-12)
        assert discrete.log_integral_capital() == pytest.approx(bayes.log_integral_capital(), rel=1e-12)

    def test_refinement_is_within_error_estimate(self):
        xs = list(IIDSampler(Distribution.RADEMACHER, seed=11).sample(200))
        spec = QuadratureSpec()
        base = BayesMixture(make_uniform(), spec)
        fine = BayesMixture(make_uniform(), spec.refined())
        for x in xs:
            base.observe(x)
            fine.observe(x)
        change = abs(fine.log_integral_capital() - base.log_integral_capital())
        assert change <= base.quadrature_error()

    def test_ruin_after_minus_one_with_unit_atom(self):
        strategy = DiscreteMixture([(1.0, 1.0)])
        strategy.observe(-1.0)
        assert strategy.log_integral_capital() == -math.inf


class TestKronecker:
    def test_stakes_ignore_capital(self):
        strategy = Kronecker(parse_sequence("n^2"), horizon=10)
        state = new_game(GameVariant.OUFG, strategy.initial_capital)
        for x in (1.0, -1.0):
            state, _ = play_round(state, strategy.stake(state), x)
            strategy.observe(x)
        assert strategy.stake(state) == pytest.approx(1.0 / 9.0)

    def test_auxiliary_process_stays_nonnegative(self):
        strategy = Kronecker(parse_sequence("n^2"), horizon=500)
        assert strategy.z_exact
        state = _play(strategy, [-1.0] * 500)
        assert strategy.Y >= 0.0
        assert state.K == pytest.approx(strategy.Y, abs=1e-12)
        tail = math.pi ** 2 / 6.0 - sum(1.0 / i ** 2 for i in range(1, 501))
        assert strategy.Y == pytest.approx(tail, rel=1e-6)

    def test_divergent_sequence_uses_partial_sum(self):
        strategy = Kronecker(parse_sequence("n"), horizon=4)
        assert not strategy.z_exact
        assert strategy.initial_capital == pytest.approx(25.0 / 12.0)

    def test_rejects_bad_horizon(self):
        with pytest.raises(IllegalStakeError):
            Kronecker(parse_sequence("n^2"), horizon=0)
