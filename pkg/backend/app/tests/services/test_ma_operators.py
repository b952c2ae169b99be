"""
Testes dos operadores discretos de Monge-Ampère.
"""
import numpy as np
import pytest

from app.core.exceptions import SingularHessian
from app.domain.geometry.entities import GridFunction
from app.services.geometry_service import build_domain, build_grid
from app.services.ma_operators import (
    cofactor_inverse,
    det_d2_monotone,
    eig_2x2,
    gradient_central,
    hessian_central,
    monotone_lipschitz,
    spectral_norm_2x2,
)


class TestMongeAmpereOperators:
    """
    Testes de exatidão em quadráticas e de monotonia do operador de estêncil largo.
    """

    def setup_method(self):
        self.h = 0.125
        self.grid = build_grid(build_domain("disk", {"radius": 1.0}), self.h, snap_fraction=0.25)

    def field(self, func):
        return GridFunction.from_function(self.grid, func)

    def test_quadratic_is_reproduced_on_cut_arms(self):
        """
        Testa MA_h[|x|²/2] = 1 em todos os nós, inclusive com braços de corte.
        """
        u = self.field(lambda p: 0.5 * np.sum(p ** 2, axis=1))
        np.testing.assert_allclose(det_d2_monotone(u), 1.0, atol=1e-9)
        np.testing.assert_allclose(det_d2_monotone(u, stencil=1), 1.0, atol=1e-9)

    def test_axis_aligned_quadratic(self):
        u = self.field(lambda p: p[:, 0] ** 2 + 0.5 * p[:, 1] ** 2)
        np.testing.assert_allclose(det_d2_monotone(u), 2.0, atol=1e-9)

    def test_central_hessian_recovers_mixed_term(self):
        """
        Testa que a Hessiana central de x² + xy + y² é (2, 1, 2).
        """
        u = self.field(lambda p: p[:, 0] ** 2 + p[:, 0] * p[:, 1] + p[:, 1] ** 2)
        hessian = hessian_central(u)
        np.testing.assert_allclose(hessian.xx, 2.0, atol=1e-9)
        np.testing.assert_allclose(hessian.xy, 1.0, atol=1e-9)
        np.testing.assert_allclose(hessian.yy, 2.0, atol=1e-9)
        np.testing.assert_allclose(hessian.determinant, 3.0, atol=1e-8)

    def test_gradient_of_linear_field(self):
        u = self.field(lambda p: 3.0 * p[:, 0] - 2.0 * p[:, 1] + 1.0)
        gradient = gradient_central(u)
        np.testing.assert_allclose(gradient[:, 0], 3.0, atol=1e-12)
        np.testing.assert_allclose(gradient[:, 1], -2.0, atol=1e-12)

    def test_concave_field_is_negative(self):
        u = self.field(lambda p: -0.5 * np.sum(p ** 2, axis=1))
        np.testing.assert_allclose(det_d2_monotone(u), -2.0, atol=1e-9)

    def test_monotonicity(self):
        """
        Testa que subir um valor nodal não diminui MA_h nos vizinhos nem o aumenta no próprio nó.
        """
        u = self.field(lambda p: 0.5 * np.sum(p ** 2, axis=1) + 0.1 * p[:, 0] ** 4)
        before = det_d2_monotone(u)
        node = self.grid.n_interior // 2
        interior = u.interior.copy()
        interior[node] += 1e-3
        after = det_d2_monotone(u.with_interior(interior))

        others = np.arange(self.grid.n_interior) != node
        assert after[node] <= before[node] + 1e-12
        assert np.all(after[others] >= before[others] - 1e-12)

    def test_monotonicity_random_perturbations(self):
        """
        Testa a monotonia em campos convexos aleatórios, subindo ou descendo um nó por vez.
        """
        rng = np.random.default_rng(2024)
        others = np.ones(self.grid.n_interior, dtype=bool)
        violations = 0
        for _ in range(1000):
            a, c = rng.uniform(0.2, 2.0, size=2)
            b = rng.uniform(-0.9, 0.9) * np.sqrt(a * c)
            quartic = rng.uniform(0.0, 0.5)
            u = self.field(
                lambda p: a * p[:, 0] ** 2 + 2.0 * b * p[:, 0] * p[:, 1] + c * p[:, 1] ** 2
                + quartic * p[:, 0] ** 4
            )
            before = det_d2_monotone(u)
            node = rng.integers(self.grid.n_interior)
            delta = rng.choice([-1.0, 1.0]) * rng.uniform(1e-4, 1e-1)
            interior = u.interior.copy()
            interior[node] += delta
            after = det_d2_monotone(u.with_interior(interior))

            others[:] = True
            others[node] = False
            change = np.sign(delta) * (after - before)
            if np.any(change[others] < -1e-12) or change[node] > 1e-12:
                violations += 1
        assert violations == 0

    def test_central_hessian_second_order_on_uniform_nodes(self):
        """
        Testa que o erro da Hessiana central cai por 4 quando h cai pela metade.

        Para x⁴ + x³y + x²y² + y⁴ o erro nos nós uniformes é exatamente proporcional a h².
        """
        def u_func(p):
            x, y = p[:, 0], p[:, 1]
            return x ** 4 + x ** 3 * y + x ** 2 * y ** 2 + y ** 4

        errors = []
        for h in (0.125, 0.0625):
            grid = build_grid(build_domain("disk", {"radius": 1.0}), h, snap_fraction=0.25)
            hessian = hessian_central(GridFunction.from_function(grid, u_func))
            x, y = grid.interior_points[:, 0], grid.interior_points[:, 1]
            exact = (12 * x ** 2 + 6 * x * y + 2 * y ** 2, 3 * x ** 2 + 4 * x * y, 2 * x ** 2 + 12 * y ** 2)
            uniform = grid.fully_uniform_nodes()
            errors.append(max(
                float(np.max(np.abs(approx[uniform] - value[uniform])))
                for approx, value in zip((hessian.xx, hessian.xy, hessian.yy), exact)
            ))
        assert errors[0] == pytest.approx(2.0 * 0.125 ** 2, rel=1e-6)
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=1e-3)

    def test_lipschitz_bound_on_uniform_nodes(self):
        """
        Testa a cota 4/h² para |x|²/2 nos nós com os oito braços cheios.
        """
        u = self.field(lambda p: 0.5 * np.sum(p ** 2, axis=1))
        bound = monotone_lipschitz(u)
        uniform = self.grid.fully_uniform_nodes()
        np.testing.assert_allclose(bound[uniform], 4.0 / self.h ** 2, rtol=1e-9)
        assert np.all(bound >= 4.0 / self.h ** 2 * (1.0 - 1e-9))

    def test_invalid_stencil(self):
        u = self.field(lambda p: p[:, 0])
        with pytest.raises(ValueError):
            det_d2_monotone(u, stencil=3)


class TestSmallMatrices:
    """
    Testes das fórmulas fechadas 2x2.
    """

    def test_eigenvalues(self):
        lam_min, lam_max = eig_2x2(2.0, 1.0, 2.0)
        assert lam_min == pytest.approx(1.0)
        assert lam_max == pytest.approx(3.0)

    def test_eigenvalues_vectorized(self):
        lam_min, lam_max = eig_2x2(np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([4.0, 0.0]))
        np.testing.assert_allclose(lam_min, [1.0, -2.0])
        np.testing.assert_allclose(lam_max, [4.0, 2.0])

    def test_spectral_norm(self):
        assert spectral_norm_2x2(-3.0, 0.0, 1.0) == pytest.approx(3.0)

    def test_cofactor_inverse(self):
        matrix = np.array([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(cofactor_inverse(matrix) @ matrix, np.eye(2), atol=1e-15)

    def test_singular_matrix(self):
        with pytest.raises(SingularHessian):
            cofactor_inverse([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularHessian):
            cofactor_inverse([[1.0, 0.0], [0.0, 1e-13]])
