"""
Serviço de problemas: validação das condições (P1)-(P3), compatibilidade de
ordem 1 e montagem de problemas a partir de expressões.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from app.core.exceptions import EvaluationError
from app.core.parallel import parallel_map
from app.domain.geometry.entities import Domain
from app.domain.problem.entities import CompatibilityReport, ConditionReport, EquationKind, ProblemSpec
from app.domain.problem.value_objects.expression import ScalarExpression
from app.services.ma_operators import eig_2x2

logger = logging.getLogger(__name__)

CONDITION_TOLERANCE = 1e-8
COMPATIBILITY_TOLERANCE = 1e-6


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"{what} não finito em ponto amostrado")
    return values


def _time_samples(spec: ProblemSpec, density: int) -> np.ndarray:
    return np.linspace(0.0, spec.horizon, density + 1)


def _boundary_samples(spec: ProblemSpec, density: int) -> np.ndarray:
    """
    Pontos de ∂Ω: 4·density ângulos uniformes, ou {0, 1} no caso unidimensional.
    """
    if spec.is_one_dimensional:
        return np.array([[0.0, 0.0], [1.0, 0.0]])
    theta = 2.0 * np.pi * np.arange(4 * density) / (4 * density)
    return spec.domain.boundary_point(theta)


def _interior_samples(spec: ProblemSpec, density: int) -> np.ndarray:
    """
    Rede de espaçamento 1/density restrita ao interior.
    """
    spacing = 1.0 / density
    if spec.is_one_dimensional:
        x = np.arange(1, density) * spacing
        return np.stack([x, np.zeros_like(x)], axis=1)
    return _lattice_inside(spec.domain, spacing)


def _lattice_inside(domain: Domain, spacing: float) -> np.ndarray:
    half_x, half_y = domain.form.half_widths()
    cx, cy = domain.center
    i = np.arange(math.floor((cx - half_x) / spacing), math.ceil((cx + half_x) / spacing) + 1)
    j = np.arange(math.floor((cy - half_y) / spacing), math.ceil((cy + half_y) / spacing) + 1)
    ii, jj = np.meshgrid(i, j, indexing="ij")
    points = np.stack([ii.ravel(), jj.ravel()], axis=1) * spacing
    return points[domain.contains(points)]


def _extreme_eigenvalue(spec: ProblemSpec, hessian: Tuple[np.ndarray, np.ndarray, np.ndarray], lowest: bool) -> np.ndarray:
    xx, xy, yy = hessian
    if spec.is_one_dimensional:
        return xx
    lam_min, lam_max = eig_2x2(xx, xy, yy)
    return lam_min if lowest else lam_max


def validate_conditions(
    spec: ProblemSpec,
    density: int,
    tolerance: float = CONDITION_TOLERANCE,
) -> ConditionReport:
    """
    Mede as margens das condições (P1)-(P3) numa amostragem determinística.

    (P1) min em ∂Ω×[0,T] de φ_t + ψ - c₀ (fluxo de Gauss: φ_t - c₀);
    (P2) min dos autovalores de D²φ(·,0) no interior;
    (P3) max dos autovalores de D²ψ no interior × [0,T] (não se aplica ao fluxo de Gauss).

    Args:
        spec: Problema
        density: Amostras por unidade de comprimento (e ao longo de [0,T])
        tolerance: Tolerância das margens

    Returns:
        ConditionReport: Margens e contagens de amostras

    Raises:
        EvaluationError: Se ψ ou φ for não finito em alguma amostra
    """
    density = int(density)
    if density < 2:
        raise ValueError(f"Densidade de amostragem deve ser >= 2: {density}")

    times = _time_samples(spec, density)
    boundary = _boundary_samples(spec, density)
    interior = _interior_samples(spec, density)
    gcf = spec.kind == EquationKind.GCF

    def p1_at(t: float) -> float:
        rate = _finite(spec.phi.time_derivative(boundary, t), "φ_t")
        source = 0.0 if gcf else _finite(spec.psi_at(boundary, t), "ψ")
        return float(np.min(rate + source)) - spec.c0

    p1_margin = min(parallel_map(p1_at, times))

    _finite(spec.phi_at(interior, 0.0), "φ")
    hess_phi = tuple(_finite(c, "D²φ") for c in spec.phi.hessian(interior, 0.0))
    p2_min_eig = float(np.min(_extreme_eigenvalue(spec, hess_phi, lowest=True)))

    p3: Optional[float] = None
    if not gcf:
        def p3_at(t: float) -> float:
            _finite(spec.psi_at(interior, t), "ψ")
            hess_psi = tuple(_finite(c, "D²ψ") for c in spec.psi.hessian(interior, t))
            return float(np.max(_extreme_eigenvalue(spec, hess_psi, lowest=False)))

        p3 = max(parallel_map(p3_at, times))

    report = ConditionReport(
        p1_margin=p1_margin,
        p2_min_eig=p2_min_eig,
        p3_max_concavity_violation=p3,
        n_boundary_samples=int(boundary.shape[0]),
        n_interior_samples=int(interior.shape[0]),
        n_time_samples=int(times.shape[0]),
        tolerance=tolerance,
    )
    failed = report.failed_conditions()
    if failed:
        logger.warning("Problema %s viola %s", spec.name, ", ".join(failed))
    return report


def check_compatibility_order1(
    spec: ProblemSpec,
    density: int = 32,
    tolerance: float = COMPATIBILITY_TOLERANCE,
) -> CompatibilityReport:
    """
    Resíduo max |-φ_t + det D²φ - ψ| em ∂Ω no instante t = 0.

    Args:
        spec: Problema do tipo PMA
        density: Densidade da amostragem de fronteira
        tolerance: Tolerância do resíduo

    Returns:
        CompatibilityReport: Resíduo máximo e veredito

    Raises:
        ValueError: Se o problema não for do tipo PMA
        EvaluationError: Se algum dado for não finito
    """
    if spec.kind != EquationKind.PMA:
        raise ValueError("Compatibilidade de ordem 1 definida apenas para Monge-Ampère parabólica")

    boundary = _boundary_samples(spec, int(density))
    rate = _finite(spec.phi.time_derivative(boundary, 0.0), "φ_t")
    xx, xy, yy = (_finite(c, "D²φ") for c in spec.phi.hessian(boundary, 0.0))
    det = xx if spec.is_one_dimensional else xx * yy - xy * xy
    source = _finite(spec.psi_at(boundary, 0.0), "ψ")
    residual = float(np.max(np.abs(-rate + det - source)))
    return CompatibilityReport(residual=residual, tolerance=tolerance, n_samples=int(boundary.shape[0]))


def inline_problem(
    domain: Domain,
    psi: str,
    phi: str,
    horizon: float,
    c0: float,
    kind: EquationKind = EquationKind.PMA,
    gamma: float = 1.0,
    exact: Optional[str] = None,
    name: str = "inline",
) -> ProblemSpec:
    """
    Monta um problema a partir de expressões em x1, x2, t.

    Raises:
        ParseError: Se alguma expressão não passar na lista branca
    """
    return ProblemSpec(
        name=name,
        kind=kind,
        horizon=horizon,
        psi=ScalarExpression.create(psi),
        phi=ScalarExpression.create(phi),
        c0=c0,
        domain=domain,
        gamma=gamma,
        exact=ScalarExpression.create(exact) if exact is not None else None,
        description="problema definido por expressões",
    )
