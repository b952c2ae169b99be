"""
Value Object para dados em forma fechada descritos por expressões.

As expressões usam as variáveis x1, x2, t (e r2 = x1² + x2²) e um conjunto fixo
de funções elementares. O texto é validado por uma lista branca da árvore
sintática antes de ser entregue ao sympy; nenhum código é carregado.
"""
import ast
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Tuple, Union

import numpy as np
import sympy

from app.core.exceptions import EvaluationError, ParseError
from app.domain.problem.interfaces import ScalarData

X1, X2, T = sympy.symbols("x1 x2 t", real=True)

_NAMESPACE = {
    "x1": X1,
    "x2": X2,
    "t": T,
    "r2": X1 ** 2 + X2 ** 2,
    "pi": sympy.pi,
    "E": sympy.E,
    "exp": sympy.exp,
    "log": sympy.log,
    "sqrt": sympy.sqrt,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "tanh": sympy.tanh,
    "abs": sympy.Abs,
}

_FUNCTIONS = {"exp", "log", "sqrt", "sin", "cos", "tanh", "abs"}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant, ast.Load,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
)


def _check_syntax(text: str) -> None:
    """
    Valida o texto contra a lista branca.

    Raises:
        ParseError: Sintaxe inválida, nó proibido ou nome desconhecido
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"Expressão inválida {text!r}: {exc.msg}") from exc

    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ParseError(f"Construção não permitida em {text!r}: {type(node).__name__}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ParseError(f"Constante não numérica em {text!r}: {node.value!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
                raise ParseError(f"Função não permitida em {text!r}")
            if len(node.args) != 1 or node.keywords:
                raise ParseError(f"Funções aceitam exatamente um argumento: {text!r}")
        if isinstance(node, ast.Name) and node.id not in _NAMESPACE:
            raise ParseError(f"Nome desconhecido em {text!r}: {node.id}")


@dataclass(frozen=True)
class ScalarExpression(ScalarData):
    """
    Dado escalar f(x1, x2, t) representado por uma expressão sympy.

    As derivadas em t e a Hessiana espacial são exatas (diferenciação simbólica).
    """
    expr: sympy.Expr
    source: str = ""

    def __post_init__(self):
        extra = self.expr.free_symbols - {X1, X2, T}
        if extra:
            names = ", ".join(sorted(str(s) for s in extra))
            raise ParseError(f"Variáveis livres não suportadas: {names}")

    @staticmethod
    def create(value: Union[str, float, int, sympy.Expr]) -> 'ScalarExpression':
        """
        Cria uma expressão a partir de texto, número ou expressão sympy.

        Args:
            value: Descrição do dado

        Returns:
            ScalarExpression: Objeto validado

        Raises:
            ParseError: Se o texto não passar na lista branca
        """
        if isinstance(value, ScalarExpression):
            return value
        if isinstance(value, sympy.Basic):
            return ScalarExpression(sympy.sympify(value), source=str(value))
        if isinstance(value, (int, float)):
            if not np.isfinite(value):
                raise ParseError(f"Constante não finita: {value!r}")
            return ScalarExpression(sympy.nsimplify(value), source=repr(value))
        if not isinstance(value, str):
            raise ParseError(f"Tipo de expressão não suportado: {type(value).__name__}")

        text = value.strip()
        _check_syntax(text)
        expr = sympy.parse_expr(text, local_dict=dict(_NAMESPACE))
        return ScalarExpression(expr, source=text)

    @cached_property
    def _value(self) -> Callable:
        return sympy.lambdify((X1, X2, T), self.expr, modules="numpy")

    @cached_property
    def _time_derivative(self) -> Callable:
        return sympy.lambdify((X1, X2, T), sympy.diff(self.expr, T), modules="numpy")

    @cached_property
    def _hessian(self) -> Tuple[Callable, Callable, Callable]:
        return tuple(
            sympy.lambdify((X1, X2, T), sympy.diff(self.expr, a, b), modules="numpy")
            for a, b in ((X1, X1), (X1, X2), (X2, X2))
        )

    def _apply(self, func: Callable, points: np.ndarray, t: float) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        with np.errstate(all="ignore"):
            values = func(points[..., 0], points[..., 1], float(t))
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise EvaluationError(f"Expressão {self.source!r} com valor complexo")
        return np.array(np.broadcast_to(values.astype(float), points.shape[:-1]))

    def evaluate(self, points: np.ndarray, t: float) -> np.ndarray:
        return self._apply(self._value, points, t)

    def time_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        return self._apply(self._time_derivative, points, t)

    def hessian(self, points: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        xx, xy, yy = self._hessian
        return self._apply(xx, points, t), self._apply(xy, points, t), self._apply(yy, points, t)

    def describe(self) -> str:
        return self.source or str(self.expr)

    def __str__(self) -> str:
        return self.describe()
