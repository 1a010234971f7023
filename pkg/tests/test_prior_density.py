import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from Herramientas.GameErrors import ConfigError, PriorDomainError
from Modulos.PriorDensity import (
    PriorFamily,
    build_staircase_tilt,
    load_custom_table,
    make_custom,
    make_efkp,
    make_lil,
    make_power,
    make_prior,
    make_tilted,
    make_uniform,
)
from Modulos.PriorValidator import require_valid, validate_assumption1


class TestFamilies:
    def test_uniform(self):
        prior = make_uniform()
        assert prior.density(0.3) == pytest.approx(1.0)
        assert prior.log_total_mass() == pytest.approx(0.0)
        assert prior.eps_pi == 1.0
        assert prior.delta_pi == 1.0

    def test_power(self):
        prior = make_power(0.5)
        assert prior.density(0.25) == pytest.approx(2.0)
        assert math.exp(prior.log_total_mass()) == pytest.approx(2.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(1e-12, 1.0))
    def test_power_matches_closed_form(self, a, eps):
        prior = make_power(a)
        assert prior.log_density(eps) == pytest.approx(-a * math.log(eps), abs=1e-9)

    @pytest.mark.parametrize("a", [0.0, 1.0, -0.2, 1.5])
    def test_power_rejects_exponent(self, a):
        with pytest.raises(PriorDomainError):
            make_power(a)

    def test_lil_formula_and_constant_extension(self):
        prior = make_lil()
        t = math.log(1e10)
        expected = t - math.log(t) - 2.0 * math.log(math.log(t))
        assert prior.log_density(1e-10) == pytest.approx(expected)
        assert prior.density(0.5) == pytest.approx(prior.density(prior.eps0))
        assert prior.eps_pi == pytest.approx(prior.eps0)

    def test_lil_closed_mass_agrees_with_quadrature(self):
        prior = make_lil()
        for t in (30.0, 200.0, 1e4):
            assert prior.log_mass_below_t(t) == pytest.approx(-math.log(math.log(t)))
            assert prior.quadrature_log_mass(t) == pytest.approx(prior.log_mass_below_t(t), rel=1e-6)
        assert prior.quadrature_log_mass(0.0) == pytest.approx(prior.log_total_mass(), rel=1e-6)

    def test_lil_quadrature_keeps_the_unrepresentable_tail(self):
        # Casi toda la masa bajo t = 1e300 vive en t > máximo float64.
        prior = make_lil()
        t = 1e300
        assert prior.quadrature_log_mass(t) == pytest.approx(-math.log(math.log(t)), rel=1e-6)

    def test_power_quadrature_tail_vanishes(self):
        prior = make_power(0.5)
        for t in (0.0, 3.0, 40.0):
            assert prior.quadrature_log_mass(t) == pytest.approx(prior.log_mass_below_t(t), rel=1e-6)

    def test_lil_rejects_eps0(self):
        with pytest.raises(PriorDomainError):
            make_lil(0.1)

    def test_efkp_is_flat_on_representable_eps(self):
        prior = make_efkp(4, 0.5)
        assert prior.t0 > 1e38
        assert prior.density(1e-300) == pytest.approx(1.0)
        assert prior.density(0.9) == pytest.approx(1.0)
        assert prior.params["log_scale"] > 1e38

    def test_efkp_rejects_parameters(self):
        with pytest.raises(PriorDomainError):
            make_efkp(3, 0.5)
        with pytest.raises(PriorDomainError):
            make_efkp(4, 0.0)

    def test_custom_log_linear_interpolation(self):
        prior = make_custom([0.01, 1.0], [100.0, 1.0], eps_pi=0.5, delta_pi=1.0)
        assert prior.density(0.1) == pytest.approx(10.0)
        assert prior.density(1e-5) == pytest.approx(100.0)
        assert prior.eps_pi == pytest.approx(0.5)

    def test_custom_table_from_csv(self, write_csv):
        path = write_csv("pi.csv", [("epsilon", "pi"), (0.01, 100.0), (1.0, 1.0)])
        prior = load_custom_table(path, eps_pi=0.5, delta_pi=1.0)
        assert prior.family is PriorFamily.CUSTOM
        assert prior.density(0.1) == pytest.approx(10.0)

    def test_custom_rejects_bad_table(self):
        with pytest.raises(PriorDomainError):
            make_custom([0.5], [1.0], 0.5, 1.0)
        with pytest.raises(PriorDomainError):
            make_custom([0.5, 2.0], [1.0, 1.0], 0.5, 1.0)

    def test_domain(self):
        prior = make_uniform()
        for eps in (0.0, -0.1, 1.5):
            with pytest.raises(PriorDomainError):
                prior.log_density(eps)

    def test_make_prior(self):
        assert make_prior("Power", a=0.25).params["a"] == 0.25
        assert make_prior("lil").family is PriorFamily.LIL
        with pytest.raises(ConfigError) as info:
            make_prior("beta")
        assert info.value.field == "prior"

    def test_rescaled(self):
        prior = make_power(0.5)
        scaled = prior.rescaled(3.0)
        assert scaled.log_density(0.2) - prior.log_density(0.2) == pytest.approx(math.log(3.0))
        assert scaled.log_total_mass() == pytest.approx(prior.log_total_mass() + math.log(3.0))
        with pytest.raises(PriorDomainError):
            prior.rescaled(0.0)


class TestStaircase:
    def test_uniform_breakpoints_are_dyadic(self):
        tilt = build_staircase_tilt(make_uniform(), k_max=10)
        assert tilt.depth == 10
        np.testing.assert_allclose(tilt.breakpoints, 2.0 ** -np.arange(1, 11), rtol=1e-9)

    def test_power_breakpoints_halve_the_mass(self):
        prior = make_power(0.5)
        tilt = build_staircase_tilt(prior, k_max=6)
        total = prior.log_total_mass()
        for k, t_k in enumerate(tilt.breakpoints_t, start=1):
            assert prior.log_mass_below_t(t_k) == pytest.approx(total - k * math.log(2.0), abs=1e-9)

    def test_step_values(self):
        tilt = build_staircase_tilt(make_uniform(), k_max=10)
        assert tilt.value(0.7) == 1.0
        assert tilt.value(0.3) == 1.0
        assert tilt.value(0.2) == 2.0
        assert tilt.value(0.01) == 6.0

    def test_tilted_density_and_mass(self):
        base = make_uniform()
        prior = make_tilted(base, build_staircase_tilt(base))
        assert prior.family is PriorFamily.TILTED
        assert prior.base is base
        assert prior.density(0.2) == pytest.approx(2.0)
        # 1/2 + Σ k 2^{-(k+1)} = 3/2
        assert math.exp(prior.log_total_mass()) == pytest.approx(1.5, rel=1e-6)

    def test_tilted_mass_is_closed_form(self):
        base = make_uniform()
        prior = make_tilted(base, build_staircase_tilt(base))
        assert prior.mass_below is not None
        # Bajo ε = 1/8 quedan los escalones k >= 3: Σ_{k>=3} k 2^{-(k+1)} = 1/2
        assert math.exp(prior.log_mass_below_t(3.0 * math.log(2.0))) == pytest.approx(0.5, rel=1e-9)
        for t in (0.0, 0.5, 3.0):
            assert prior.quadrature_log_mass(t) == pytest.approx(prior.log_mass_below_t(t), rel=1e-6)

    @pytest.mark.parametrize("t", [0.0, 5.0, 30.0, 1e4])
    def test_tilted_lil_mass_matches_quadrature(self, t):
        base = make_lil()
        prior = make_tilted(base, build_staircase_tilt(base))
        assert prior.quadrature_log_mass(t) == pytest.approx(prior.log_mass_below_t(t), rel=1e-6)

    def test_tilted_lil_total_mass_exceeds_base(self):
        base = make_lil()
        tilt = build_staircase_tilt(base)
        prior = make_tilted(base, tilt)
        total = prior.log_total_mass()
        assert math.isfinite(total)
        assert base.log_total_mass() < total < base.log_total_mass() + math.log(tilt.depth)


class TestAssumption1:
    @pytest.mark.parametrize("prior", [make_uniform(), make_power(0.5), make_lil()],
                             ids=["uniform", "power", "lil"])
    def test_standard_families_pass(self, prior):
        report = validate_assumption1(prior)
        assert report.passed, report.warnings
        assert set(report.log_partial_masses) == {"0.0001", "1e-08", "1e-16"}

    def test_decreasing_eps_pi_fails_monotonicity(self):
        prior = make_custom([1e-30, 1.0], [1e60, 1.0], eps_pi=1.0, delta_pi=1.0)
        report = validate_assumption1(prior)
        assert not report.monotone_ok
        assert report.monotone_violations > 0
        assert not report.passed
        assert any(w.startswith("⚠️") for w in report.warnings)
        with pytest.raises(ValueError):
            require_valid(prior)

    def test_declared_delta_too_high(self):
        prior = make_custom([1e-30, 1.0], [1.0, 1.0], eps_pi=0.5, delta_pi=2.0)
        report = validate_assumption1(prior)
        assert not report.lower_bound_ok
        assert report.to_dict()["passed"] is False

    def test_tilted_is_exempt_from_monotonicity(self):
        base = make_uniform()
        report = validate_assumption1(make_tilted(base, build_staircase_tilt(base, k_max=20)))
        assert report.monotone_exempt
        assert any(w.startswith("ℹ️") for w in report.warnings)

    def test_grid_size(self):
        with pytest.raises(ValueError):
            validate_assumption1(make_uniform(), grid_points=5)
