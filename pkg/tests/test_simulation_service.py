import os

import pytest

import app
from BasedeDatos.TraceRepository import RATE_COLUMNS, TraceRepository, read_report, read_trace
from Config.ExperimentConfig import ExperimentConfig
from Herramientas.GameErrors import ConfigError
from Modulos.GameEngine import GameVariant, replay
from Modulos.SimulationService import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_VIOLATION,
    rate_row,
    run_adversary_demo,
    run_command,
    run_functional,
    run_rates,
    run_simulate,
    run_verify_bounds,
)


def _cfg(**values):
    return ExperimentConfig.from_mapping({key.replace("__", "."): str(v) for key, v in values.items()})


class TestSimulate:
    def test_identical_runs_write_identical_traces(self, tmp_path):
        cfg = _cfg(name="det", reality="iid:rademacher", seeds="3", horizon=200)
        first = run_simulate(cfg, TraceRepository(str(tmp_path / "a")))
        second = run_simulate(cfg, TraceRepository(str(tmp_path / "b")))
        assert first.exit_code == EXIT_OK
        path_a = first.report["runs"][0]["trace"]
        path_b = second.report["runs"][0]["trace"]
        with open(path_a, "rb") as a, open(path_b, "rb") as b:
            assert a.read() == b.read()

    def test_trace_replays_to_reported_capital(self, repo):
        cfg = _cfg(name="rep", reality="iid:shifted,delta=0.1", horizon=150)
        result = run_simulate(cfg, repo)
        run = result.report["runs"][0]
        state = replay(GameVariant.OUFG, run["summary"]["K0"], read_trace(run["trace"]))
        assert state.K == run["summary"]["K_final"]
        assert run["summary"]["identity_violations"] == 0
        assert run["checkpoints"][-1]["n"] == 150
        assert os.path.exists(result.report_path)

    def test_ruin_is_a_normal_outcome(self, repo, write_csv):
        script = write_csv("ruina.csv", [1.0, -1.0, 0.5])
        cfg = _cfg(name="ruina", strategy="const", eps=1.0, reality=f"script:{script}", horizon=10)
        result = run_simulate(cfg, repo)
        summary = result.report["runs"][0]["summary"]
        assert result.exit_code == EXIT_OK
        assert summary["ruined"]
        assert summary["K_final"] == 0.0
        assert summary["rounds"] == 3

    def test_kronecker_survives_losing_path(self, repo, write_csv):
        script = write_csv("caida.csv", [-1.0] * 50)
        cfg = _cfg(name="kr", strategy="kronecker", b="n^2", reality=f"script:{script}", horizon=50)
        result = run_simulate(cfg, repo)
        summary = result.report["runs"][0]["summary"]
        assert result.exit_code == EXIT_OK
        assert summary["K_final"] >= 0.0
        assert summary["identity_violations"] == 0
        assert "S_over_b_tail_max" in summary

    def test_tilted_prior_checks_staircase_bound(self, repo):
        cfg = _cfg(name="esc", prior__tilt="staircase", reality="target:linear,coef=0.1",
                   theorems="remark41", horizon=100, checkpoints="50,100")
        result = run_simulate(cfg, repo)
        assert result.exit_code == EXIT_OK
        keys = [b["key"] for b in result.report["runs"][0]["checkpoints"][0]["bounds"]]
        assert keys == ["remark41"]


class TestVerifyBounds:
    def test_inflated_bounds_are_caught(self, repo):
        cfg = _cfg(name="inf", reality="target:linear,coef=0.1", horizon=200, theorems="prop31",
                   bounds__inflation=1e6)
        result = run_verify_bounds(cfg, repo=repo)
        theorems = result.report["results"]["theorems"]
        assert result.exit_code == EXIT_VIOLATION
        assert theorems["prop31"]["verdict"] == "violated"
        assert result.report["results"]["reproduce"]
        assert read_report(result.report_path)["status"] == "violation"

    def test_honest_bounds_hold(self, repo):
        cfg = _cfg(name="ok", reality="target:linear,coef=0.1", horizon=300)
        result = run_verify_bounds(cfg, theorems=("prop31", "thm41"), repo=repo)
        assert result.exit_code == EXIT_OK
        assert result.report["results"]["theorems"]["prop31"]["verdict"] == "sound"
        assert result.report["results"]["theorems"]["thm41"]["verdict"] != "violated"

    def test_short_campaign_is_inconclusive(self, repo):
        cfg = _cfg(name="corta", reality="iid:rademacher", horizon=30, seeds="0")
        result = run_verify_bounds(cfg, theorems=("thm43",), repo=repo)
        assert result.exit_code == EXIT_OK
        assert result.report["results"]["theorems"]["thm43"]["verdict"] == "inconclusive"

    @pytest.mark.slow
    def test_seed_order_does_not_change_report(self, tmp_path):
        base = dict(name="orden", reality="iid:shifted,delta=0.2", horizon=120, theorems="thm41,prop31")
        first = run_verify_bounds(_cfg(seeds="0,1,2", **base), repo=TraceRepository(str(tmp_path / "a")))
        second = run_verify_bounds(_cfg(seeds="2,0,1", **base), repo=TraceRepository(str(tmp_path / "b")))
        assert first.report["results"] == second.report["results"]

    def test_requires_bayes(self, repo):
        with pytest.raises(ConfigError):
            run_verify_bounds(_cfg(strategy="const"), repo=repo)


class TestAdversary:
    def test_divergent_series_produces_witness(self, repo):
        cfg = _cfg(name="adv", reality="adversary,b=n", horizon=20)
        result = run_adversary_demo(cfg, repo=repo)
        assert result.exit_code == EXIT_OK
        assert result.report["claim"] == "witness_guaranteed"
        assert result.report["witness_round"] == 2
        assert result.report["L_monotone"]
        assert result.report["sup_K_bound_ok"]

    def test_summable_series_makes_no_claim(self, repo):
        result = run_adversary_demo(_cfg(name="sum", reality="adversary,b=n^2", horizon=50), repo=repo)
        assert result.report["claim"] == "no_claim"
        assert result.exit_code == EXIT_OK


class TestRates:
    @pytest.mark.slow
    def test_rates_table(self, repo):
        cfg = _cfg(name="tasas", strategy="const", eps=0.1, horizon=1000)
        result = run_rates(cfg, repo)
        assert result.exit_code == EXIT_OK
        csv_path = result.report["runs"][0]["csv"]
        with open(csv_path, encoding="utf-8") as handle:
            assert handle.readline().strip() == ",".join(RATE_COLUMNS)

    def test_short_horizon_is_a_config_error(self):
        result = run_command("rates", _cfg(strategy="const", horizon=999))
        assert result.exit_code == EXIT_CONFIG
        assert result.report["field"] == "horizon"

    def test_rate_row_undefined_normalizers(self):
        row = rate_row(1, 1.0, 1.0, 0.5, 4, 0.5)
        assert row[:3] == (1, 1.0, 1.0)
        assert row[3:] == (None, None, None, None)

    @pytest.mark.parametrize("A", [1e6, 1e300, 1.7e308])
    def test_rate_row_efkp_gap_blank_for_float_A(self, A):
        # ln_5 A > 0 exige A > e^{3.8e6}, fuera de float64
        row = rate_row(10, 5.0, A, 0.5, 4, 0.5)
        assert row[3] is not None and row[4] is not None and row[5] is not None
        assert row[6] is None


class TestFunctional:
    def test_FG_band(self, repo):
        result = run_functional(_cfg(name="fg"), "FG", repo)
        assert result.exit_code == EXIT_OK
        assert result.report["band"]["inside"]
        assert result.report["rows"] > 0

    def test_GF_stays_below(self, repo):
        result = run_functional(_cfg(name="gf", functional__psi="reference"), "GF", repo)
        assert result.exit_code == EXIT_OK
        assert result.report["gf_not_below_psi"] == 0

    def test_equivalence_is_preserved(self, repo):
        cfg = _cfg(name="eq", functional__psi="reference", functional__scale=2.0)
        result = run_functional(cfg, "equiv", repo)
        assert result.exit_code == EXIT_OK
        assert result.report["preserve_G"]["passed"]
        assert result.report["preserve_F"]["passed"]

    def test_integral_test_report(self, repo):
        cfg = _cfg(name="it", functional__psi="constant", functional__c=1.0)
        result = run_functional(cfg, "integral-test", repo)
        assert result.report["integral_test"]["verdict"] == "divergent"
        assert not result.report["assumption2"]["passed"]

    def test_unknown_psi(self):
        result = run_command("functional", _cfg(functional__psi="cuadratica"), op="F")
        assert result.exit_code == EXIT_CONFIG


class TestCommandLine:
    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            _cfg(strategy="martingala")

    def test_simulate_from_file(self, tmp_path, capsys):
        path = tmp_path / "exp.cfg"
        path.write_text("name = cli\nhorizon = 25\nreality = iid:rademacher\n", encoding="utf-8")
        assert app.main(["simulate", str(path), "--set", "horizon=10"]) == EXIT_OK
        assert capsys.readouterr().out.strip().endswith("simulate_cli.json")

    def test_config_error_exit_code(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("horizonte = 25\n", encoding="utf-8")
        assert app.main(["simulate", str(path)]) == EXIT_CONFIG

    def test_inflate_flag(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("reality = target:linear,coef=0.1\nhorizon = 200\n", encoding="utf-8")
        code = app.main(["verify-bounds", str(path), "--theorems", "prop31", "--inflate", "1e6"])
        assert code == EXIT_VIOLATION

    def test_functional_without_config(self):
        assert app.main(["functional", "--op", "GF"]) == EXIT_OK
