"""
Resolução do problema e da grade a partir da configuração.
"""
import logging
from typing import Any, Dict

from app.domain.geometry.entities import Grid
from app.domain.problem.entities import ProblemSpec
from app.domain.problem.interfaces import ProblemRepository
from app.schemas.run_config import RunConfig
from app.services.geometry_service import build_domain, build_grid
from app.services.problem_service import inline_problem

logger = logging.getLogger(__name__)

DEFAULT_HORIZON = 1.0


def _builtin_params(config: RunConfig) -> Dict[str, Any]:
    params: Dict[str, Any] = {
        "gamma": config.gcf.gamma,
        "A": config.counterexample.A,
        "B": config.counterexample.B,
    }
    if config.counterexample.n is not None:
        params["n"] = config.counterexample.n
    params.update(config.problem.params)
    if config.T is not None:
        params["T"] = config.T
    return params


def resolve_problem(config: RunConfig, repository: ProblemRepository) -> ProblemSpec:
    """
    Problema embutido (com parâmetros das seções) ou definido por expressões.

    Raises:
        UnknownProblem: Se o nome não estiver no repositório
        ParseError: Se alguma expressão for rejeitada
    """
    section = config.problem
    domain = build_domain(config.domain.kind, config.domain.params()) if config.domain else None
    if section.name is not None:
        spec = repository.get(section.name, _builtin_params(config))
        if domain is not None and not spec.is_one_dimensional:
            spec = spec.replace(domain=domain)
    else:
        expressions = section.expressions
        spec = inline_problem(
            domain or build_domain("disk", {"radius": 1.0}),
            expressions.psi,
            expressions.phi,
            horizon=config.T or DEFAULT_HORIZON,
            c0=section.c0,
            kind=section.kind,
            gamma=config.gcf.gamma,
            exact=expressions.exact,
        )
    logger.info("Problema %s (%s), T=%g", spec.name, spec.kind.value, spec.horizon)
    return spec


def resolve_grid(spec: ProblemSpec, config: RunConfig, h: float = None) -> Grid:
    return build_grid(spec.domain, config.h if h is None else h, config.solver.snap_fraction)


def output_times(spec: ProblemSpec, config: RunConfig, default_count: int = 1):
    """
    Instantes de saída configurados ou k·T/default_count, k = 1..default_count.
    """
    if config.output_times:
        return [t for t in config.output_times]
    return [spec.horizon * k / default_count for k in range(1, default_count + 1)]
