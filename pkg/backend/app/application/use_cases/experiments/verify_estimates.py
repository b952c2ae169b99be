"""
Caso de uso do comando verify: executa o problema e confere as estimativas a priori.
"""
import logging
import math
from typing import List, Tuple

import numpy as np

from app.application.use_cases.experiments.problem_factory import output_times, resolve_grid, resolve_problem
from app.application.use_cases.experiments.trace_tables import write_diagnostics
from app.core.parallel import parallel_map
from app.domain.geometry.entities import Grid
from app.domain.problem.entities import EquationKind, ProblemSpec
from app.domain.problem.interfaces import ProblemRepository
from app.domain.problem.value_objects.expression import ScalarExpression
from app.domain.results.entities import RunOutcome
from app.domain.results.interfaces import ResultWriter
from app.schemas.estimate_report import ComparisonResult, EstimateReport
from app.schemas.run_config import RunConfig, config_hash
from app.services.estimate_service import (
    aggregate_comparisons,
    check_c0_bounds,
    check_comparison,
    check_dual_max_principle,
    check_dual_residual,
    check_eigen_bounds,
    check_gcf_gradient_bound,
    check_ut_bounds,
    trace_holder_seminorm,
    trace_ut_holder_seminorm,
)
from app.services.problem_service import check_compatibility_order1, inline_problem, validate_conditions
from app.services.stepper_service import solve, solve_lockstep

logger = logging.getLogger(__name__)

SNAPSHOT_COUNT = 4
# Maior deslocamento sorteado dos dados nos pares de comparação
MAX_DATA_SHIFT = 0.2
# Controle negativo: amplitude do vale em w e horizonte em passos de CFL
CONTROL_DIP = 1e-3
CONTROL_STEPS = 5


def comparison_pairs(spec: ProblemSpec, count: int, seed: int = 0) -> List[Tuple[ProblemSpec, ProblemSpec]]:
    """
    Pares ordenados (w, v) sorteados a partir do problema.

    Os pares alternam entre ordenação por φ (v com φ + s + c·r2), por ψ
    (w com ψ + a + b·r2) e pelas duas; s, c, a, b ≥ 0 sorteados com a semente.
    No fluxo de Gauss ψ não entra na equação e só φ é deslocado.

    Returns:
        List: Pares (w, v) com ψ_w ≥ ψ_v e w ≤ v em ∂_pQ_T; vazia se os dados
        não forem expressões fechadas
    """
    if not (isinstance(spec.phi, ScalarExpression) and isinstance(spec.psi, ScalarExpression)):
        return []
    rng = np.random.default_rng(seed)
    r2 = ScalarExpression.create("r2").expr
    pairs = []
    for k in range(count):
        mode = k % 3 if spec.kind == EquationKind.PMA else 0
        s, c, a, b = (float(x) for x in rng.uniform(0.0, MAX_DATA_SHIFT, size=4))
        w, v = spec, spec
        if mode in (0, 2):
            phi = ScalarExpression.create(spec.phi.expr + s + c * r2)
            v = spec.replace(name=f"{spec.name}:v{k}", phi=phi, exact=None)
        if mode in (1, 2):
            psi = ScalarExpression.create(spec.psi.expr + a + b * r2)
            w = spec.replace(name=f"{spec.name}:w{k}", psi=psi, exact=None)
        pairs.append((w, v))
    return pairs


def central_scheme_control(
    spec: ProblemSpec,
    grid: Grid,
    scheme: str = "central",
    stencil: int = 2,
    safety: float = 0.5,
    tolerance: float = 1e-12,
) -> ComparisonResult:
    """
    Par ordenado com dados côncavos em que só um esquema monótono preserva w ≤ v.

    v parte de -|x|²/2 com ψ ≡ 1 (estacionário no esquema central) e w tem um
    vale gaussiano de largura h/2 no nó interior mais próximo do centro. Com
    D²u negativa o determinante central decresce nos vizinhos, então os nós ao
    lado do vale sobem acima de v já no primeiro passo.
    """
    center = grid.interior_points[np.argmin(np.sum((grid.interior_points - spec.domain.center) ** 2, axis=1))]
    x0, y0 = (float(c) for c in center)
    width2 = grid.h ** 2 / 4.0
    horizon = CONTROL_STEPS * safety * grid.h ** 2 / 4.0
    dip = f"{CONTROL_DIP!r}*exp(-((x1 - ({x0!r}))**2 + (x2 - ({y0!r}))**2)/{width2!r})"
    spec_v = inline_problem(spec.domain, "1", "-r2/2", horizon, 1.0, name="controle:v")
    spec_w = inline_problem(spec.domain, "1", f"-r2/2 - {dip}", horizon, 1.0, name="controle:w")
    trace_w, trace_v = solve_lockstep(spec_w, spec_v, grid, stencil, safety, scheme)
    result = check_comparison(trace_w, trace_v, tolerance)
    result.note = f"controle negativo, esquema {scheme}"
    logger.info("Controle de comparação (%s): %d violações", scheme, result.violations)
    return result


class VerifyEstimatesUseCase:
    """
    Caso de uso para verificar as estimativas de um problema.

    Integra o problema, aplica cada verificação aplicável ao tipo de equação e
    grava o EstimateReport com a série de diagnósticos.
    """

    def __init__(self, repository: ProblemRepository, writer: ResultWriter):
        self.repository = repository
        self.writer = writer

    def execute(self, config: RunConfig) -> RunOutcome:
        """
        Executa o caso de uso.

        Args:
            config: Configuração resolvida

        Returns:
            RunOutcome: passed = todas as verificações asseridas passaram

        Raises:
            DegenerateDual: Se um snapshot de PMA não for discretamente convexo
            StiffnessOverflow, NonFiniteField: Falhas do integrador
        """
        spec = resolve_problem(config, self.repository)
        grid = resolve_grid(spec, config)
        tolerances = config.tolerances
        solver = config.solver
        trace = solve(
            spec,
            grid,
            output_times=output_times(spec, config, SNAPSHOT_COUNT),
            stencil=solver.stencil,
            safety=solver.safety,
            scheme=solver.scheme,
        )
        density = tolerances.condition_density or max(4, int(math.ceil(4.0 / grid.h)))

        report = EstimateReport(
            problem=spec.name,
            h=grid.h,
            config_hash=config_hash(config),
            conditions=validate_conditions(spec, density, tolerances.condition).to_dict(),
            ut_bounds=check_ut_bounds(trace, spec, tolerances.kappa),
            c0_bounds=check_c0_bounds(trace, spec, tolerances.kappa),
        )

        if spec.kind == EquationKind.PMA:
            report.compatibility = check_compatibility_order1(spec, tolerance=tolerances.compatibility).to_dict()
            spacing = config.legendre.spacing
            report.eigen_bounds = check_eigen_bounds(trace, spec, tolerances.kappa, spacing)
            later = list(range(1, len(trace.snapshots)))
            report.dual_max_principle = check_dual_max_principle(trace, later, tolerances.kappa, spacing)
            report.dual_residual = check_dual_residual(
                trace, spec, 1, tolerances.dual_residual_factor, spacing,
            )
        else:
            refined = None
            if config.gcf.refine:
                refined = solve(
                    spec,
                    resolve_grid(spec, config, h=grid.h / 2.0),
                    stencil=solver.stencil,
                    safety=solver.safety,
                    scheme=solver.scheme,
                    validate=False,
                )
            report.gradient_bound = check_gcf_gradient_bound(trace, refined, tolerances.kappa)

        pairs = comparison_pairs(spec, tolerances.comparison_pairs, config.seed)
        if pairs:
            def compare(pair):
                trace_w, trace_v = solve_lockstep(*pair, grid, solver.stencil, solver.safety, solver.scheme)
                return check_comparison(trace_w, trace_v, tolerances.comparison)

            report.comparison = aggregate_comparisons(parallel_map(compare, pairs))
        if spec.domain is not None:
            report.comparison_control = central_scheme_control(
                spec, grid, stencil=solver.stencil, safety=solver.safety, tolerance=tolerances.comparison,
            )

        report.holder.append(
            trace_holder_seminorm(trace, tolerances.holder_alpha, tolerances.holder_pairs, config.seed)
        )
        if len(trace.snapshots) >= 3:
            report.holder.append(
                trace_ut_holder_seminorm(trace, tolerances.holder_alpha, tolerances.holder_pairs, config.seed)
            )

        artifacts = [self.writer.write_document("config", config.resolved())]
        artifacts.append(write_diagnostics(self.writer, trace))
        artifacts.append(self.writer.write_document("report", report.model_dump(mode="json")))

        checks = report.asserted_checks()
        failed = sorted(name for name, passed in checks.items() if not passed)
        if failed:
            logger.warning("Verificações com falha em %s: %s", spec.name, ", ".join(failed))
        return RunOutcome(
            command="verify",
            passed=report.passed,
            artifacts=artifacts,
            summary={"checks": checks, "failed": failed, "report": report},
        )
