import os

import pytest

from Config.ExperimentConfig import (
    ExperimentConfig,
    auto_checkpoints,
    parse_config_text,
    parse_overrides,
    parse_reality,
    parse_seeds,
    parse_theorems,
)
from Herramientas.GameErrors import ConfigError
from Modulos.ComplyingAdversary import ComplyingAdversary
from Modulos.GameEngine import GameVariant
from Modulos.PriorDensity import PriorFamily
from Modulos.RealityStrategies import IIDSampler, TargetTracking
from Modulos.SkepticStrategies import BayesMixture, ConstantProportion, Kronecker


class TestParsing:
    def test_comments_and_last_wins(self):
        text = "# experimento\nstrategy = const  # apuesta fija\n\neps = 0.3\neps = 0.4\n"
        assert parse_config_text(text) == {"strategy": "const", "eps": "0.4"}

    def test_line_error_names_position(self):
        with pytest.raises(ConfigError) as info:
            parse_config_text("strategy = bayes\nsin igual\n", source="exp.cfg")
        assert info.value.field == "exp.cfg:2"

    def test_overrides(self):
        assert parse_overrides(["horizon=10", " eps = 0.2"]) == {"horizon": "10", "eps": "0.2"}
        with pytest.raises(ConfigError):
            parse_overrides(["horizon"])

    def test_seeds(self):
        assert parse_seeds("0..3") == (0, 1, 2, 3)
        assert parse_seeds("5, 7,0..1") == (5, 7, 0, 1)
        for bad in ("", "3..1", "a", "-1"):
            with pytest.raises(ConfigError):
                parse_seeds(bad)

    def test_auto_checkpoints(self):
        rounds = auto_checkpoints(1000)
        assert rounds[:5] == (1, 2, 3, 6, 10)
        assert rounds[-1] == 1000
        assert list(rounds) == sorted(set(rounds))

    def test_theorems(self):
        assert parse_theorems("THM41, prop31") == ("thm41", "prop31")
        with pytest.raises(ConfigError):
            parse_theorems("thm99")
        with pytest.raises(ConfigError):
            parse_theorems(" , ")


class TestReality:
    def test_defaults(self):
        spec = parse_reality("iid")
        assert spec.arg == "rademacher"
        assert parse_reality("target").arg == "linear"

    def test_options(self):
        spec = parse_reality("iid:shifted,delta=0.1,seed=4")
        assert spec.option("delta") == "0.1"
        assert spec.option("upper") is None

    @pytest.mark.parametrize("text", ["", "magic", "script", "iid:cauchy", "target:quadratic", "iid,delta"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_reality(text)


class TestExperiment:
    def test_defaults(self):
        cfg = ExperimentConfig.from_mapping({})
        assert cfg.strategy == "bayes"
        assert cfg.variant is GameVariant.OUFG
        assert cfg.horizon == 1000
        assert cfg.seeds == (0,)
        assert isinstance(cfg.build_strategy(), BayesMixture)
        assert isinstance(cfg.build_reality(0), IIDSampler)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_mapping({"horizonte": "10"})
        assert info.value.field == "horizonte"

    @pytest.mark.parametrize("key, value", [
        ("strategy", "martingala"), ("eps", "1.5"), ("horizon", "0"), ("bounds.C", "0.6"),
        ("adversary.scheme", "aleatorio"), ("adversary.window", "1"), ("workers", "0"),
        ("rates.efkp_b", "3"), ("eps", "medio"), ("checkpoints", "5000"),
    ])
    def test_validation_names_field(self, key, value):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_mapping({key: value})
        assert info.value.field == key

    def test_bayes_requires_one_sided_game(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_mapping({"variant": "BFG"})
        assert info.value.field == "variant"

    def test_load_with_overrides(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("name = prueba\nstrategy = const\neps = 0.25\nhorizon = 50\n", encoding="utf-8")
        cfg = ExperimentConfig.load(str(path), ["horizon=20", "seeds=0..2"])
        assert cfg.name == "prueba"
        assert cfg.horizon == 20
        assert cfg.seeds == (0, 1, 2)
        strategy = cfg.build_strategy()
        assert isinstance(strategy, ConstantProportion)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentConfig.load(str(tmp_path / "no_existe.cfg"))

    def test_reality_seed_option(self):
        cfg = ExperimentConfig.from_mapping({"reality": "iid:rademacher,seed=9"})
        assert cfg.seeds == (9,)
        explicit = ExperimentConfig.from_mapping({"reality": "iid:rademacher,seed=9", "seeds": "1"})
        assert explicit.seeds == (1,)

    def test_adversary_takes_b_from_reality(self):
        cfg = ExperimentConfig.from_mapping({"reality": "adversary,b=n"})
        assert cfg.b.source == "n"
        assert isinstance(cfg.build_reality(0, 1.0), ComplyingAdversary)

    def test_target_and_kronecker(self):
        cfg = ExperimentConfig.from_mapping({"strategy": "kronecker", "b": "n^2",
                                             "reality": "target:linear,coef=0.2", "horizon": "10"})
        assert isinstance(cfg.build_strategy(), Kronecker)
        assert isinstance(cfg.build_reality(0), TargetTracking)

    def test_tilted_prior(self):
        cfg = ExperimentConfig.from_mapping({"prior": "power", "prior.a": "0.5", "prior.tilt": "staircase"})
        prior = cfg.build_prior()
        assert prior.family is PriorFamily.TILTED
        assert prior.params["base_family"] == "power"

    def test_bad_prior_maps_to_config_error(self):
        cfg = ExperimentConfig.from_mapping({"prior": "power", "prior.a": "1.5"})
        with pytest.raises(ConfigError) as info:
            cfg.build_prior()
        assert info.value.field == "prior"

    def test_output_dir_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SKEPTICLAB_OUT_DIR", str(tmp_path / "env"))
        assert ExperimentConfig.from_mapping({}).output_dir == str(tmp_path / "env")
        assert ExperimentConfig.from_mapping({"output.dir": "propio"}).output_dir == "propio"


EXAMPLES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "experimentos")


@pytest.mark.parametrize("name", sorted(os.listdir(EXAMPLES_DIR)))
def test_shipped_experiments_load(name):
    cfg = ExperimentConfig.load(os.path.join(EXAMPLES_DIR, name))
    assert cfg.name == os.path.splitext(name)[0]
    cfg.build_strategy()
