"""
Testes das verificações de estimativas a priori.
"""
import logging

import numpy as np
import pytest

from app.core.exceptions import IncompatibleTraces
from app.domain.problem.value_objects.expression import ScalarExpression
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.services.estimate_service import (
    aggregate_comparisons,
    check_c0_bounds,
    check_comparison,
    check_dual_max_principle,
    check_dual_residual,
    check_eigen_bounds,
    check_gcf_gradient_bound,
    check_ut_bounds,
    holder_seminorm,
    trace_holder_seminorm,
    trace_ut_holder_seminorm,
)
from app.services.geometry_service import build_grid
from app.services.problem_service import inline_problem
from app.services.stepper_service import solve, solve_lockstep


class TestStationaryEstimates:
    """
    Verificações sobre a solução estacionária |x|²/2, em que todas as cotas valem com folga.
    """

    @classmethod
    def setup_class(cls):
        cls.spec = BuiltinProblemRepository().get("stationary_quadratic", {"T": 0.1})
        cls.grid = build_grid(cls.spec.domain, 0.125, snap_fraction=0.25)
        cls.trace = solve(cls.spec, cls.grid, output_times=[0.05, 0.1], validate=False)

    def test_ut_bounds(self):
        result = check_ut_bounds(self.trace, self.spec)
        assert result.passed is True
        assert result.theoretical_lower == pytest.approx(1.0)
        assert result.margin == pytest.approx(0.0, abs=1e-9)
        assert result.tolerance == pytest.approx(10.0 * 0.125)
        assert result.dt_min <= result.dt_max

    def test_c0_bounds(self):
        """
        Testa max u ≤ max na fronteira parabólica e min u ≥ min φ(·,0) - T·sup ψ⁺.
        """
        result = check_c0_bounds(self.trace, self.spec)
        assert result.passed is True
        assert result.boundary_max == pytest.approx(0.5)
        assert result.lower_barrier == pytest.approx(-0.1)
        assert result.min_u == pytest.approx(0.0, abs=1e-12)

    def test_eigen_bounds(self):
        result = check_eigen_bounds(self.trace, self.spec)
        assert result.passed is True
        assert result.interior_min_lambda == pytest.approx(1.0, abs=1e-8)
        assert result.dual_lower_bound <= 1.0 + 1e-8

    def test_dual_max_principle(self):
        result = check_dual_max_principle(self.trace, [1, 2])
        assert result.passed is True
        assert result.interior_sup == pytest.approx(1.0, abs=1e-8)
        assert result.times == [0.05, 0.1]

    def test_dual_residual(self):
        result = check_dual_residual(self.trace, self.spec, 1)
        assert result.passed is True
        assert result.tolerance == pytest.approx(5.0 * (0.125 + 0.05))
        assert result.n_valid > 0

    def test_holder_seminorms(self):
        holder = trace_holder_seminorm(self.trace, 0.5, n_pairs=512, seed=3)
        assert holder.field == "u"
        assert holder.seminorm > 0.0
        rate = trace_ut_holder_seminorm(self.trace, 0.5, n_pairs=512, seed=3)
        assert rate.field == "u_t"
        assert rate.seminorm < 1e-8


class TestManufacturedDualResidual:
    """
    Resíduo da equação dual para u = (1+t)|x|²/2.
    """

    def test_residual_within_tolerance(self):
        spec = BuiltinProblemRepository().get("mms_quadratic", {"T": 0.2})
        grid = build_grid(spec.domain, 0.125, snap_fraction=0.25)
        trace = solve(spec, grid, output_times=[0.1, 0.2], validate=False)

        result = check_dual_residual(trace, spec, 1)

        assert result.tolerance == pytest.approx(5.0 * (0.125 + 0.1))
        assert result.passed is True
        assert result.max_abs <= result.tolerance
        assert result.n_valid > 0
        assert result.t == pytest.approx(0.1)


class TestComparison:
    """
    Testes do princípio de comparação discreto em passo comum.
    """

    @classmethod
    def setup_class(cls):
        cls.spec_w = BuiltinProblemRepository().get("stationary_quadratic", {"T": 0.05})
        cls.spec_v = cls.spec_w.replace(name="deslocado", phi=ScalarExpression.create("r2/2 + 0.1"))
        cls.grid = build_grid(cls.spec_w.domain, 0.25, snap_fraction=0.25)
        cls.trace_w, cls.trace_v = solve_lockstep(cls.spec_w, cls.spec_v, cls.grid)

    def test_ordered_pair_passes(self):
        result = check_comparison(self.trace_w, self.trace_v)
        assert result.passed is True
        assert result.violations == 0
        assert result.worst_gap == pytest.approx(-0.1, abs=1e-12)
        assert result.n_steps == self.trace_w.n_steps

    def test_aggregate_over_pairs(self):
        ordered = check_comparison(self.trace_w, self.trace_v)
        crossed = ordered.model_copy(update={"passed": False, "violations": 3, "worst_gap": 0.5})
        result = aggregate_comparisons([ordered, crossed, ordered])
        assert result.passed is False
        assert result.violations == 3
        assert result.worst_gap == 0.5
        assert result.n_pairs == 3
        assert aggregate_comparisons([ordered]).passed is True
        with pytest.raises(ValueError):
            aggregate_comparisons([])

    def test_reversed_pair_is_incompatible(self):
        with pytest.raises(IncompatibleTraces):
            check_comparison(self.trace_v, self.trace_w)

    def test_forcing_order_is_checked(self):
        """
        Testa que ψ_w < ψ_v invalida a hipótese da comparação.
        """
        heavier = self.spec_v.replace(psi=ScalarExpression.create(2))
        trace_w, trace_v = solve_lockstep(self.spec_w, heavier, self.grid)
        with pytest.raises(IncompatibleTraces):
            check_comparison(trace_w, trace_v)

    def test_independent_runs_are_rejected(self):
        lone = solve(self.spec_v, self.grid, validate=False)
        with pytest.raises(IncompatibleTraces):
            check_comparison(self.trace_w, lone)


class TestHolderSeminorm:
    """
    Testes da estimativa amostrada da seminorma de Hölder.
    """

    def setup_method(self):
        rng = np.random.default_rng(0)
        self.points = rng.uniform(-1.0, 1.0, size=(50, 2))
        self.times = np.array([0.0, 0.5, 1.0])

    def test_lipschitz_function(self):
        values = np.tile(self.points[:, 0], (3, 1))
        result = holder_seminorm(self.times, self.points, values, alpha=1.0, n_pairs=2048)
        assert 0.0 < result.seminorm <= 1.0 + 1e-12

    def test_more_pairs_only_add_samples(self):
        """
        Testa que aumentar o número de pares nunca diminui a estimativa (mesma semente).
        """
        values = np.sin(3.0 * self.points[:, 0])[None, :] + self.times[:, None] ** 2
        small = holder_seminorm(self.times, self.points, values, alpha=0.5, n_pairs=64, seed=7)
        large = holder_seminorm(self.times, self.points, values, alpha=0.5, n_pairs=128, seed=7)
        again = holder_seminorm(self.times, self.points, values, alpha=0.5, n_pairs=64, seed=7)
        assert small.seminorm <= large.seminorm
        assert again.seminorm == small.seminorm

    def test_few_snapshots_warn(self, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger("app"), "propagate", True)
        values = np.tile(self.points[:, 0], (2, 1))
        with caplog.at_level(logging.WARNING, logger="app.services.estimate_service"):
            result = holder_seminorm(self.times[:2], self.points, values, alpha=1.0, n_pairs=256)
        assert result.n_times == 2
        assert "apenas 2 instantes" in caplog.text

    def test_enough_snapshots_do_not_warn(self, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger("app"), "propagate", True)
        values = np.tile(self.points[:, 0], (3, 1))
        with caplog.at_level(logging.WARNING, logger="app.services.estimate_service"):
            result = holder_seminorm(self.times, self.points, values, alpha=1.0, n_pairs=256)
        assert result.n_times == 3
        assert "instantes" not in caplog.text

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            holder_seminorm(self.times, self.points, np.zeros((3, 50)), alpha=1.5)

    def test_rate_needs_three_snapshots(self):
        spec = BuiltinProblemRepository().get("stationary_quadratic", {"T": 0.01})
        trace = solve(spec, build_grid(spec.domain, 0.25, snap_fraction=0.25), validate=False)
        with pytest.raises(ValueError):
            trace_ut_holder_seminorm(trace, 0.5)


class TestNotApplicableChecks:
    """
    Verificações que ficam sem veredito quando as hipóteses não valem.
    """

    def setup_method(self):
        self.repository = BuiltinProblemRepository()

    def test_gcf_ut_bounds_are_reported_only(self):
        spec = self.repository.get("gcf_quadratic_start", {"T": 0.02})
        trace = solve(spec, build_grid(spec.domain, 0.25, snap_fraction=0.25), validate=False)
        assert check_ut_bounds(trace, spec).passed is None

    def test_gradient_bound(self):
        """
        Testa a cota do gradiente com e sem o par de refinamento.
        """
        spec = self.repository.get("gcf_quadratic_start", {"T": 0.02})
        coarse = solve(spec, build_grid(spec.domain, 0.25, snap_fraction=0.25), validate=False)
        fine = solve(spec, build_grid(spec.domain, 0.125, snap_fraction=0.25), validate=False)

        alone = check_gcf_gradient_bound(coarse)
        assert alone.passed is None
        assert alone.sup_gradient > 0.0

        paired = check_gcf_gradient_bound(coarse, fine)
        assert paired.passed is True
        assert paired.ratio >= 1.0

    @pytest.mark.parametrize("gamma", [0.5, 1.0])
    def test_gradient_bound_under_refinement(self, gamma):
        """
        Testa que sup |Du| muda pouco entre h = 1/8 e h = 1/16 para γ = 1/2 e γ = 1.
        """
        spec = self.repository.get("gcf_quadratic_start", {"gamma": gamma})
        coarse = solve(spec, build_grid(spec.domain, 0.125, snap_fraction=0.25), validate=False)
        fine = solve(spec, build_grid(spec.domain, 0.0625, snap_fraction=0.25), validate=False)

        result = check_gcf_gradient_bound(coarse, fine)

        assert result.passed is True
        assert result.tolerance == pytest.approx(10.0 * 0.125)
        assert 1.0 <= result.ratio < 1.2

    def test_non_convex_run_reports_c0_bounds(self):
        disk = self.repository.get("stationary_quadratic").domain
        spec = inline_problem(disk, psi="0", phi="-r2/2", horizon=0.01, c0=1.0)
        trace = solve(spec, build_grid(disk, 0.25, snap_fraction=0.25), validate=False)
        result = check_c0_bounds(trace, spec)
        assert result.passed is None
        assert result.note
