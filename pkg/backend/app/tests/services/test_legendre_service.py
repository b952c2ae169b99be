"""
Testes da transformada de Legendre discreta e do resíduo da equação dual.
"""
import numpy as np
import pytest

from app.core.exceptions import DegenerateDual, DualGridTooSmall
from app.domain.geometry.entities import GridFunction
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.services.geometry_service import build_domain, build_grid
from app.services.legendre_service import (
    biconjugate,
    build_dual_grid,
    check_convex,
    conjugate_brute_force,
    dual_hessian_sup,
    dual_residual,
    legendre_transform,
)
from app.services.stepper_service import solve


class TestLegendreTransform:
    """
    Testes da conjugação discreta sobre um campo convexo.
    """

    def setup_method(self):
        self.grid = build_grid(build_domain("disk", {"radius": 1.0}), 0.125, snap_fraction=0.25)
        self.u = GridFunction.from_function(
            self.grid, lambda p: 0.5 * np.sum(p ** 2, axis=1) + 0.3 * p[:, 0] ** 4 + 0.1 * p[:, 0] * p[:, 1],
        )

    def test_separable_matches_brute_force_bitwise(self):
        """
        Testa que a transformada separável reproduz a força bruta bit a bit, argmax incluído.
        """
        dual = build_dual_grid([self.u])
        separable = legendre_transform(self.u, dual, method="separable")
        brute = legendre_transform(self.u, dual, method="brute")
        np.testing.assert_array_equal(separable.values, brute.values)
        np.testing.assert_array_equal(separable.argmax, brute.argmax)

    def test_ties_resolve_to_lowest_index(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        values, index = conjugate_brute_force(np.zeros((1, 2)), points, np.zeros(3))
        assert values[0] == 0.0
        assert index[0] == 0

    def test_default_dual_grid(self):
        """
        Testa espaçamento 2h, nós em múltiplos inteiros e cobertura da imagem do gradiente.
        """
        dual = build_dual_grid([self.u])
        assert dual.spacing == pytest.approx(0.25)
        np.testing.assert_allclose(dual.y1 / dual.spacing, np.round(dual.y1 / dual.spacing), atol=1e-12)
        assert not dual.forced
        lower, upper = dual.box()
        assert lower[0] < -1.0 and upper[0] > 1.0

    def test_forced_box_too_small(self):
        with pytest.raises(DualGridTooSmall):
            build_dual_grid([self.u], box=((-0.1, -0.1), (0.1, 0.1)))

    def test_forced_box(self):
        dual = build_dual_grid([self.u], spacing=0.5, box=((-3.0, -3.0), (3.0, 3.0)))
        assert dual.forced
        assert dual.shape == (13, 13)

    def test_biconjugate_is_below(self):
        """
        Testa u** ≤ u em todos os nós.
        """
        envelope = biconjugate(self.u, build_dual_grid([self.u]))
        assert np.all(envelope.values <= self.u.values + 1e-13)

    def test_far_dual_nodes_attain_on_boundary(self):
        dual = build_dual_grid([self.u])
        field = legendre_transform(self.u, dual)
        assert field.boundary_argmax[0]
        assert field.as_array().shape == dual.shape

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            legendre_transform(self.u, build_dual_grid([self.u]), method="fft")

    def test_check_convex(self):
        concave = GridFunction.from_function(self.grid, lambda p: -np.sum(p ** 2, axis=1))
        with pytest.raises(DegenerateDual):
            check_convex(concave, 0.5)
        check_convex(self.u, 0.0)


class TestDualResidual:
    """
    Testes do resíduo dual sobre a solução estacionária |x|²/2 (dual |y|²/2, det D²U = 1).
    """

    @classmethod
    def setup_class(cls):
        cls.spec = BuiltinProblemRepository().get("stationary_quadratic", {"T": 0.1})
        grid = build_grid(cls.spec.domain, 0.125, snap_fraction=0.25)
        cls.trace = solve(cls.spec, grid, output_times=[0.05, 0.1], validate=False)

    def test_residual_vanishes(self):
        result = dual_residual(self.trace, self.spec, 1)
        assert result.n_valid > 0
        assert result.max_abs < 1e-8
        assert result.snapshot_dt == pytest.approx(0.05)
        assert result.t == pytest.approx(0.05)
        assert result.n_excluded > 0
        assert result.to_dict()["n_valid"] == result.n_valid

    def test_dual_hessian_of_quadratic(self):
        dual = build_dual_grid(self.trace.snapshots)
        field = legendre_transform(self.trace.final, dual, 0.1)
        interior_sup, _ = dual_hessian_sup(field)
        assert interior_sup == pytest.approx(1.0, abs=1e-8)

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            dual_residual(self.trace, self.spec, 0)


class TestLegendreProperties:
    """
    Propriedades da conjugação sobre campos sorteados.
    """

    @classmethod
    def setup_class(cls):
        cls.grid = build_grid(build_domain("disk", {"radius": 1.0}), 0.25, snap_fraction=0.25)
        cls.rng = np.random.default_rng(1234)

    def random_convex_field(self) -> GridFunction:
        a, c = self.rng.uniform(0.3, 2.0, size=2)
        b = self.rng.uniform(-0.8, 0.8) * np.sqrt(a * c)
        quartic = self.rng.uniform(0.0, 0.5)
        slope = self.rng.uniform(-1.0, 1.0, size=2)
        return GridFunction.from_function(
            self.grid,
            lambda p: 0.5 * (a * p[:, 0] ** 2 + 2.0 * b * p[:, 0] * p[:, 1] + c * p[:, 1] ** 2)
            + quartic * p[:, 1] ** 4 + p @ slope,
        )

    def test_separable_matches_brute_force_on_random_fields(self):
        for _ in range(50):
            u = self.random_convex_field()
            dual = build_dual_grid([u])
            separable = legendre_transform(u, dual, method="separable")
            brute = legendre_transform(u, dual, method="brute")
            np.testing.assert_array_equal(separable.values, brute.values)
            np.testing.assert_array_equal(separable.argmax, brute.argmax)

    def test_fenchel_young_slack(self):
        """
        Testa u(x) + U(y) ≥ x·y em todos os pares, com igualdade no argmax.
        """
        for _ in range(10):
            u = self.random_convex_field()
            dual = build_dual_grid([u])
            field = legendre_transform(u, dual)
            y = dual.points
            slack = u.values[None, :] + field.values[:, None] - y @ self.grid.points.T
            assert slack.min() >= -1e-13
            at_argmax = slack[np.arange(dual.n_nodes), field.argmax]
            np.testing.assert_allclose(at_argmax, 0.0, atol=1e-12)

    def test_transform_reverses_order(self):
        """
        Testa u ≤ v ⇒ U ≥ V e u** ≤ v** na mesma grade dual, sem tolerância.
        """
        for _ in range(10):
            u = self.random_convex_field()
            bump = self.rng.uniform(0.0, 0.3, size=self.grid.n_nodes)
            v = GridFunction(self.grid, u.interior + bump[:self.grid.n_interior], u.boundary + bump[self.grid.n_interior:])
            dual = build_dual_grid([u, v])
            assert np.all(legendre_transform(u, dual).values >= legendre_transform(v, dual).values)
            assert np.all(biconjugate(u, dual).values <= biconjugate(v, dual).values)

    def test_biconjugate_recovers_convex_field(self):
        """
        Testa u** = u nos nós interiores quando a grade dual contém Du(x) para todo x.

        Para u = c|x|²/2 + ℓ·x com espaçamento dual c·h e ℓ múltiplo do espaçamento,
        Du(x) = c·x + ℓ é nó dual e o argmax correspondente é o próprio x.
        """
        h = 0.125
        grid = build_grid(build_domain("disk", {"radius": 1.0}), h, snap_fraction=0.25)
        n = grid.n_interior
        for _ in range(5):
            c = self.rng.uniform(0.5, 2.0)
            spacing = c * h
            slope = spacing * self.rng.integers(-4, 5, size=2)
            u = GridFunction.from_function(grid, lambda p: 0.5 * c * np.sum(p ** 2, axis=1) + p @ slope)
            envelope = biconjugate(u, build_dual_grid([u], spacing=spacing))
            assert np.all(envelope.values <= u.values + 1e-13)
            np.testing.assert_allclose(envelope.values[:n], u.values[:n], rtol=0.0, atol=1e-12)
