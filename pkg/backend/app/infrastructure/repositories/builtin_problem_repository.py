"""
Biblioteca de problemas embutidos.

As forçantes manufaturadas são derivadas simbolicamente da solução exata,
ψ = -u_t + det D²u, de modo que a identidade vale por construção.
"""
import logging
from typing import Any, Callable, Dict, List, Optional

import sympy

from app.core.exceptions import UnknownProblem
from app.domain.counterexample.value_objects.bump_params import BumpParams
from app.domain.problem.entities import EquationKind, ProblemSpec
from app.domain.problem.interfaces import ProblemRepository
from app.domain.problem.value_objects.expression import T, X1, X2, ScalarExpression
from app.services.geometry_service import build_domain

logger = logging.getLogger(__name__)

R2 = X1 ** 2 + X2 ** 2


def manufactured_forcing(u: sympy.Expr) -> sympy.Expr:
    """
    ψ = -u_t + det D²u para uma solução exata u(x1, x2, t).
    """
    u_xx = sympy.diff(u, X1, 2)
    u_yy = sympy.diff(u, X2, 2)
    u_xy = sympy.diff(u, X1, X2)
    return sympy.simplify(-sympy.diff(u, T) + u_xx * u_yy - u_xy ** 2)


def _unit_disk():
    return build_domain("disk", {"radius": 1.0})


def _manufactured(name: str, u: sympy.Expr, horizon: float, description: str) -> ProblemSpec:
    exact = ScalarExpression.create(u)
    return ProblemSpec(
        name=name,
        kind=EquationKind.PMA,
        horizon=horizon,
        psi=ScalarExpression.create(manufactured_forcing(u)),
        phi=exact,
        c0=1.0,
        domain=_unit_disk(),
        exact=exact,
        description=description,
    )


def mms_quadratic(params: Dict[str, Any]) -> ProblemSpec:
    return _manufactured(
        "mms_quadratic",
        (1 + T) * R2 / 2,
        float(params.get("T", 1.0)),
        "u = (1+t)|x|²/2 no disco unitário",
    )


def mms_exponential(params: Dict[str, Any]) -> ProblemSpec:
    return _manufactured(
        "mms_exponential",
        sympy.exp(T) * R2 / 2,
        float(params.get("T", 1.0)),
        "u = e^t|x|²/2 no disco unitário (dependência não linear em t)",
    )


def stationary_quadratic(params: Dict[str, Any]) -> ProblemSpec:
    phi = ScalarExpression.create(R2 / 2)
    return ProblemSpec(
        name="stationary_quadratic",
        kind=EquationKind.PMA,
        horizon=float(params.get("T", 1.0)),
        psi=ScalarExpression.create(1),
        phi=phi,
        c0=1.0,
        domain=_unit_disk(),
        exact=phi,
        description="ψ ≡ 1, φ = |x|²/2: solução estacionária",
    )


def gcf_quadratic_start(params: Dict[str, Any]) -> ProblemSpec:
    slope = sympy.nsimplify(float(params.get("slope", 1.0)))
    return ProblemSpec(
        name="gcf_quadratic_start",
        kind=EquationKind.GCF,
        horizon=float(params.get("T", 0.5)),
        psi=ScalarExpression.create(0),
        phi=ScalarExpression.create(slope * R2 / 2 + T),
        c0=1.0,
        domain=_unit_disk(),
        gamma=float(params.get("gamma", 1.0)),
        description="fluxo de Gauss a partir de a|x|²/2 com fronteira subindo à taxa 1",
    )


def ce_1d(params: Dict[str, Any]) -> ProblemSpec:
    return ProblemSpec(
        name="ce_1d",
        kind=EquationKind.PMA,
        horizon=float(params.get("T", 2.0)),
        psi=ScalarExpression.create(1),
        phi=ScalarExpression.create(X1 ** 2 / 2),
        c0=1.0,
        dimension=1,
        bump=BumpParams.create(params.get("A", 1.0), params.get("B", 1.0)),
        description="-v_t + v_xx = 1 em (0,1), v = x²/2; base do contraexemplo unidimensional",
    )


def ce_radial(params: Dict[str, Any]) -> ProblemSpec:
    return ProblemSpec(
        name="ce_radial",
        kind=EquationKind.PMA,
        horizon=float(params.get("T", 1.0)),
        psi=ScalarExpression.create(1),
        phi=ScalarExpression.create(R2 / 2),
        c0=1.0,
        domain=_unit_disk(),
        bump=BumpParams.create(params.get("A", 1.0), params.get("B", 1.0)),
        radial_dimension=int(params.get("n", 2)),
        description="base radial v = r²/2 com ψ ≡ 1; perturbação por bump em r",
    )


_BUILDERS: Dict[str, Callable[[Dict[str, Any]], ProblemSpec]] = {
    "mms_quadratic": mms_quadratic,
    "mms_exponential": mms_exponential,
    "stationary_quadratic": stationary_quadratic,
    "gcf_quadratic_start": gcf_quadratic_start,
    "ce_1d": ce_1d,
    "ce_radial": ce_radial,
}


class BuiltinProblemRepository(ProblemRepository):
    """
    Implementação do repositório de problemas com a biblioteca embutida.
    """

    def get(self, name: str, params: Optional[Dict[str, Any]] = None) -> ProblemSpec:
        """
        Constrói o problema pedido.

        Args:
            name: Nome do problema
            params: Parâmetros opcionais (T, gamma, slope, A, B, n)

        Returns:
            ProblemSpec: Especificação completa

        Raises:
            UnknownProblem: Se o nome não estiver na biblioteca
        """
        builder = _BUILDERS.get(name)
        if builder is None:
            raise UnknownProblem(f"Problema desconhecido: {name!r} (disponíveis: {', '.join(self.names())})")
        spec = builder(dict(params or {}))
        logger.debug("Problema %s construído", name)
        return spec

    def names(self) -> List[str]:
        return sorted(_BUILDERS)
