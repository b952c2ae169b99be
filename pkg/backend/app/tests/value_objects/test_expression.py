"""
Testes para o Value Object ScalarExpression
"""
import math

import numpy as np
import pytest
import sympy

from app.core.exceptions import ParseError
from app.domain.problem.value_objects.expression import ScalarExpression, X1


class TestScalarExpression:
    """
    Testes unitários para dados em forma fechada.
    """

    def setup_method(self):
        self.points = np.array([[0.0, 0.0], [0.5, -0.25], [0.3, 0.4]])

    def test_evaluate_text(self):
        """
        Testa a avaliação de uma expressão em texto nos pontos dados.
        """
        expr = ScalarExpression.create("x1**2 + 3*x2 + t")
        values = expr.evaluate(self.points, 2.0)
        np.testing.assert_allclose(values, [2.0, 0.25 - 0.75 + 2.0, 0.09 + 1.2 + 2.0])

    def test_constant_broadcasts_to_points(self):
        expr = ScalarExpression.create(1)
        values = expr.evaluate(self.points, 0.0)
        assert values.shape == (3,)
        np.testing.assert_array_equal(values, 1.0)

    def test_r2_shortcut_and_exact_hessian(self):
        """
        Testa a Hessiana simbólica de r2/2 e uma derivada mista.
        """
        xx, xy, yy = ScalarExpression.create("r2/2").hessian(self.points, 0.0)
        np.testing.assert_array_equal(xx, 1.0)
        np.testing.assert_array_equal(xy, 0.0)
        np.testing.assert_array_equal(yy, 1.0)

        _, mixed, _ = ScalarExpression.create("x1*x2*t").hessian(self.points, 3.0)
        np.testing.assert_array_equal(mixed, 3.0)

    def test_exact_time_derivative(self):
        expr = ScalarExpression.create("exp(t)*x1")
        rate = expr.time_derivative(self.points, 1.0)
        np.testing.assert_allclose(rate, math.e * self.points[:, 0], rtol=1e-15)

    def test_create_from_sympy(self):
        expr = ScalarExpression.create(X1 ** 3)
        np.testing.assert_allclose(expr.evaluate(self.points, 0.0), self.points[:, 0] ** 3)
        assert ScalarExpression.create(expr) is expr

    @pytest.mark.parametrize("text", [
        "__import__('os')",
        "x1.real",
        "y + 1",
        "lambda: 1",
        "[x1]",
        "'texto'",
        "exp(x1, x2)",
        "x1 +",
    ])
    def test_rejects_outside_whitelist(self, text):
        """
        Testa que construções fora da lista branca geram ParseError.
        """
        with pytest.raises(ParseError):
            ScalarExpression.create(text)

    def test_rejects_extra_symbols(self):
        with pytest.raises(ParseError):
            ScalarExpression(sympy.Symbol("z") + X1)

    def test_rejects_non_finite_constant(self):
        with pytest.raises(ParseError):
            ScalarExpression.create(float("inf"))

    def test_describe_keeps_source(self):
        assert ScalarExpression.create(" r2/2 ").describe() == "r2/2"
