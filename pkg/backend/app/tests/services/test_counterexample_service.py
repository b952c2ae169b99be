"""
Testes dos solvers reduzidos (1D e radial) e dos experimentos de perda de convexidade.
"""
import math

import numpy as np
import pytest

from app.core.exceptions import NonFiniteField
from app.domain.counterexample.entities import RadialProblem
from app.domain.counterexample.value_objects.bump_params import BumpParams
from app.domain.problem.value_objects.expression import ScalarExpression
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.services.counterexample_service import (
    THRESHOLD_DOUBLINGS,
    bump_derivative,
    bump_rho,
    bump_w,
    find_threshold,
    radial_derivatives,
    radial_forcing,
    rho_scan,
    run_counterexample_1d,
    run_counterexample_radial,
    solve_1d,
    solve_radial,
    uniform_nodes,
)


class TestUniformNodes:

    def test_nodes(self):
        np.testing.assert_array_equal(uniform_nodes(0.25), [0.0, 0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize("h", [0.3, 1.0, 0.0, -0.5])
    def test_invalid_spacing(self, h):
        with pytest.raises(ValueError):
            uniform_nodes(h)


class TestBumpFunctions:

    def test_module_functions_delegate(self):
        params = BumpParams.create(2.0, 0.5)
        x = np.linspace(0.0, 1.0, 11)
        np.testing.assert_array_equal(bump_w(x, 0.5, params), params.w(x, 0.5))
        np.testing.assert_array_equal(bump_rho(x, 0.5, params), params.rho(x, 0.5))
        np.testing.assert_allclose(bump_derivative(x, 0.5, params, 2), params.w_xx(x, 0.5), rtol=1e-9, atol=1e-300)


class TestSolve1D:
    """
    Testes do solver explícito de -u_t + u_xx = ψ em (0, 1).
    """

    def test_stationary_quadratic(self):
        """
        Testa que ψ ≡ 1 com φ = x²/2 é estacionário e tem u_xx ≡ 1.
        """
        trace = solve_1d(ScalarExpression.create(1), ScalarExpression.create("x1**2/2"), 1.0 / 16.0, 0.5)
        np.testing.assert_allclose(trace.final, trace.nodes ** 2 / 2.0, atol=1e-13)
        np.testing.assert_allclose(trace.min_second, 1.0, atol=1e-10)
        np.testing.assert_allclose(trace.max_second, 1.0, atol=1e-10)
        assert trace.record_times[-1] == 0.5

    def test_time_step(self):
        h = 1.0 / 16.0
        trace = solve_1d(ScalarExpression.create(0), ScalarExpression.create(0), h, 0.3)
        assert trace.dt <= 0.4 * h * h
        assert 0.3 / trace.dt == pytest.approx(round(0.3 / trace.dt))
        assert len(trace.record_times) == round(0.3 / trace.dt) + 1

    def test_linear_data_stay_linear(self):
        trace = solve_1d(ScalarExpression.create(0), ScalarExpression.create("2*x1 + 1"), 0.125, 0.2)
        np.testing.assert_allclose(trace.final, 2.0 * trace.nodes + 1.0, atol=1e-13)
        np.testing.assert_allclose(trace.min_second, 0.0, atol=1e-10)

    def test_manufactured_solution_converges(self):
        """
        Testa v = e^t x²/2 com ψ = -e^t x²/2 + e^t: erro pequeno e decrescente sob refinamento.
        """
        psi = ScalarExpression.create("-exp(t)*x1**2/2 + exp(t)")
        phi = ScalarExpression.create("exp(t)*x1**2/2")
        errors = []
        for h in (1.0 / 8.0, 1.0 / 16.0):
            trace = solve_1d(psi, phi, h, 0.5, output_times=[0.25])
            assert trace.times == [0.0, 0.25, 0.5]
            exact = math.exp(0.5) * trace.nodes ** 2 / 2.0
            errors.append(float(np.max(np.abs(trace.final - exact))))
        assert errors[1] < errors[0]
        assert errors[1] < 2e-3

    def test_stride_keeps_fields(self):
        trace = solve_1d(ScalarExpression.create(1), ScalarExpression.create("x1**2/2"), 0.25, 0.1, stride=2)
        steps = len(trace.record_times) - 1
        assert len(trace.second_fields) == (steps + 1) // 2 + 1

    def test_non_finite_data(self):
        with pytest.raises(NonFiniteField):
            solve_1d(ScalarExpression.create("log(x1 - 2)"), ScalarExpression.create(0), 0.25, 0.1)

    def test_invalid_horizon(self):
        with pytest.raises(ValueError):
            solve_1d(ScalarExpression.create(0), ScalarExpression.create(0), 0.25, 0.0)


class TestFindThreshold:
    """
    Testes da busca por duplicação e bissecção.
    """

    def test_linear_margin(self):
        assert find_threshold(lambda a: 1.0 - a / 10.0) == pytest.approx(10.0, rel=1e-7)

    def test_already_failing(self):
        assert find_threshold(lambda a: -1.0 - a) == 0.0

    def test_never_failing(self):
        assert find_threshold(lambda a: 1.0) is None


class TestCounterexample1D:
    """
    Perda de convexidade da solução 1D com ψ + ρ.
    """

    @classmethod
    def setup_class(cls):
        cls.spec = BuiltinProblemRepository().get("ce_1d", {"T": 1.0})
        cls.report = run_counterexample_1d(cls.spec, BumpParams.create(1.0, 1.0), h=1.0 / 64.0, stride=4)

    def test_threshold_near_closed_form(self):
        """
        Testa A* ≈ e¹⁶/256, o valor em que 1 + A·w_xx(1/2, 1) se anula.
        """
        expected = math.exp(16.0) / 256.0
        assert self.report.threshold == pytest.approx(expected, rel=0.1)
        assert self.report.to_dict()["threshold_note"] == "dependente da grade"

    def test_small_amplitude_stays_convex(self):
        assert self.report.convex
        assert self.report.details["base_min_second_derivative"] == pytest.approx(1.0, abs=1e-9)

    def test_superposition_and_endpoints(self):
        assert self.report.details["superposition_gap"] < 0.1 * math.exp(-16.0)
        assert self.report.details["rho_endpoint_max"] <= 1e-300
        assert self.report.details["rho_scan"]["argmin"] == pytest.approx(0.5, abs=1e-3)

    def test_amplitude_sweep(self):
        """
        Testa que A muito acima do limiar produz u_xx < 0 na solução direta.
        """
        report = run_counterexample_1d(self.spec, h=1.0 / 16.0, amplitudes=[1.0, 1e5], search=False)
        assert report.threshold is None
        assert report.rows[0]["min_second_derivative"] > 0.0
        assert report.rows[1]["min_second_derivative"] < 0.0
        assert report.rows[1]["psi_at_r0"] is None

    def test_bumped_problem_fails_only_concavity(self):
        """
        Testa que ψ + ρ mantém (P1) e (P2) e viola apenas (P3).
        """
        assert self.report.details["failed_conditions"] == ["P3"]
        conditions = self.report.details["bumped_conditions"]
        assert conditions["p1_pass"] and conditions["p2_pass"]
        assert conditions["p3_max_concavity_violation"] > 0.0

    def test_large_amplitude_fails_only_concavity(self):
        report = run_counterexample_1d(self.spec, BumpParams.create(1e5, 1.0), h=1.0 / 16.0, search=False)
        assert report.details["failed_conditions"] == ["P3"]
        assert report.details["bumped_conditions"]["p3_max_concavity_violation"] > 1.0
        assert report.min_second_derivative < 0.0

    def test_rejects_two_dimensional_problem(self):
        with pytest.raises(ValueError):
            run_counterexample_1d(BuiltinProblemRepository().get("stationary_quadratic"))

    def test_rho_scan(self):
        scan = rho_scan(BumpParams.create(1.0, 1.0), 1.0)
        assert scan["min"] == pytest.approx(-math.exp(-16.0) * 257.0, rel=1e-6)
        assert scan["max"] > 0.0


@pytest.mark.slow
class TestCounterexample1DReference:
    """
    Experimento 1D na resolução de referência h = 1/200.
    """

    @classmethod
    def setup_class(cls):
        spec = BuiltinProblemRepository().get("ce_1d", {"T": 1.0})
        cls.report = run_counterexample_1d(spec, BumpParams.create(1.0, 1.0), h=1.0 / 200.0, stride=10)

    def test_threshold_within_doubling_budget(self):
        assert THRESHOLD_DOUBLINGS == 20
        assert self.report.threshold is not None
        assert math.ceil(math.log2(self.report.threshold)) <= THRESHOLD_DOUBLINGS
        assert self.report.threshold == pytest.approx(math.exp(16.0) / 256.0, rel=0.05)

    def test_superposition_constant(self):
        """
        Testa |u - (v + w)| ≤ C(h² + Δt) com C < 10.
        """
        details = self.report.details
        assert details["superposition_gap"] < 10.0 * details["h2_plus_dt"]
        assert self.report.h == pytest.approx(1.0 / 200.0)
        assert self.report.dt <= 0.4 / 200.0 ** 2


class TestSolveRadial:
    """
    Testes do solver radial v_t = (v_r/r)^{n-1}·v_rr - ψ.
    """

    def setup_method(self):
        self.psi = ScalarExpression.create(1)
        self.phi = ScalarExpression.create("r2/2")

    @pytest.mark.parametrize("dimension", [2, 3])
    def test_stationary_profile(self, dimension):
        problem = RadialProblem(dimension, self.psi, self.phi, 0.2)
        trace = solve_radial(problem, 1.0 / 16.0)
        np.testing.assert_allclose(trace.final, trace.nodes ** 2 / 2.0, atol=1e-12)
        np.testing.assert_allclose(trace.min_second, 1.0, atol=1e-9)
        assert not trace.negative_slope
        assert trace.dt <= 0.4 / 16.0 ** 2

    def test_manufactured_quadratic_is_exact(self):
        """
        Testa v = (1+t)r²/2 em n = 2, reproduzido até o arredondamento.
        """
        spec = BuiltinProblemRepository().get("mms_quadratic", {"T": 0.2})
        problem = RadialProblem(2, spec.psi, spec.phi, spec.horizon)
        trace = solve_radial(problem, 1.0 / 16.0, output_times=[0.1])
        assert trace.times == [0.0, 0.1, 0.2]
        for t, v in zip(trace.times, trace.snapshots):
            np.testing.assert_allclose(v, (1.0 + t) * trace.nodes ** 2 / 2.0, atol=1e-10)

    def test_negative_slope_is_flagged(self):
        problem = RadialProblem(2, self.psi, ScalarExpression.create("-r2/2"), 0.01)
        trace = solve_radial(problem, 0.125)
        assert trace.negative_slope

    def test_grid_too_coarse(self):
        with pytest.raises(ValueError):
            solve_radial(RadialProblem(2, self.psi, self.phi, 0.1), 1.0 / 3.0)

    def test_radial_derivatives_of_quadratic(self):
        r = uniform_nodes(0.125)
        v_r, v_rr = radial_derivatives(r ** 2 / 2.0, r)
        np.testing.assert_allclose(v_r, r, atol=1e-12)
        np.testing.assert_allclose(v_rr, 1.0, atol=1e-10)


class TestCounterexampleRadial:
    """
    Dado Ψ induzido pelo bump radial.
    """

    @classmethod
    def setup_class(cls):
        spec = BuiltinProblemRepository().get("ce_radial", {"T": 1.0, "n": 2})
        cls.problem = RadialProblem.from_spec(spec)
        cls.report = run_counterexample_radial(cls.problem, h=1.0 / 16.0, amplitudes=(1.0, 10.0, 100.0))

    def test_boundary_invariance(self):
        """
        Testa Ψ(1, t) = ψ(1, t) exatamente.
        """
        assert self.report.details["boundary_gap_max"] == 0.0

    def test_forcing_decreases_with_amplitude(self):
        fit = self.report.details["psi_fit"]
        assert self.report.details["psi_decreasing"]
        assert fit["slope"] < 0.0
        assert fit["r_squared"] > 0.99
        assert self.report.details["r0"] == pytest.approx(0.5, abs=1e-3)

    def test_threshold_is_found(self):
        assert self.report.threshold is not None
        assert 0.0 < self.report.threshold <= math.exp(16.0) / 256.0 * 1.1
        assert self.report.convex

    def test_forcing_at_boundary_node(self):
        params = BumpParams.create(50.0, 1.0)
        r = np.array([1.0])
        value = radial_forcing(self.problem, params, r, 0.5, np.array([1.0]), np.array([1.0]))
        np.testing.assert_array_equal(value, self.problem.psi_at(r, 0.5))
