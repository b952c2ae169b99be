"""
Caso de uso do comando legendre: transformadas duais dos snapshots e resíduo da equação dual.
"""
import logging

import numpy as np

from app.application.use_cases.experiments.problem_factory import output_times, resolve_grid, resolve_problem
from app.domain.problem.entities import EquationKind
from app.domain.problem.interfaces import ProblemRepository
from app.domain.results.entities import RunOutcome
from app.domain.results.interfaces import ResultWriter
from app.schemas.run_config import RunConfig
from app.services.estimate_service import check_dual_residual
from app.services.legendre_service import biconjugate, build_dual_grid, check_convex, legendre_transform
from app.services.stepper_service import solve

logger = logging.getLogger(__name__)

# Folga de arredondamento de u** ≤ u
BICONJUGATE_SLACK = 1e-13
SNAPSHOT_COUNT = 4


class LegendreTransformUseCase:
    """
    Caso de uso para transformar os snapshots de uma execução numa grade dual comum.
    """

    def __init__(self, repository: ProblemRepository, writer: ResultWriter):
        self.repository = repository
        self.writer = writer

    def execute(self, config: RunConfig) -> RunOutcome:
        """
        Executa o caso de uso.

        Grava um CSV (y1, y2, U, argmax, boundary_argmax) por snapshot e um
        resumo com a biconjugada do estado inicial e os resíduos duais.

        Raises:
            DegenerateDual: Se algum snapshot não for discretamente convexo
            DualGridTooSmall: Se a caixa dual imposta não cobrir os gradientes
        """
        spec = resolve_problem(config, self.repository)
        grid = resolve_grid(spec, config)
        settings = config.legendre
        trace = solve(
            spec,
            grid,
            output_times=output_times(spec, config, SNAPSHOT_COUNT),
            stencil=config.solver.stencil,
            safety=config.solver.safety,
            scheme=config.solver.scheme,
        )
        for t, u in zip(trace.times, trace.snapshots):
            check_convex(u, t)

        dual = build_dual_grid(trace.snapshots, spacing=settings.spacing, padding=settings.padding, box=settings.box)
        artifacts = [self.writer.write_document("config", config.resolved())]
        points = dual.points
        for k, (t, u) in enumerate(zip(trace.times, trace.snapshots)):
            field = legendre_transform(u, dual, t, method=settings.method)
            rows = zip(points[:, 0], points[:, 1], field.values, field.argmax, field.boundary_argmax)
            artifacts.append(
                self.writer.write_table(f"dual_{k:03d}", ("y1", "y2", "U", "argmax", "boundary_argmax"), rows)
            )

        initial = trace.snapshots[0]
        envelope = biconjugate(initial, dual)
        excess = float(np.max(envelope.values - initial.values))
        gap = float(np.max(initial.values - envelope.values))
        biconjugate_ok = excess <= BICONJUGATE_SLACK

        residuals = []
        if spec.kind == EquationKind.PMA:
            for index in range(1, len(trace.snapshots)):
                residuals.append(
                    check_dual_residual(
                        trace, spec, index, config.tolerances.dual_residual_factor, settings.spacing,
                    ).model_dump(mode="json")
                )
        residuals_ok = all(r["passed"] is not False for r in residuals)

        summary = {
            "problem": spec.name,
            "dual_grid": dual.describe(),
            "method": settings.method,
            "snapshots": [{"index": k, "t": t} for k, t in enumerate(trace.times)],
            "biconjugate": {"max_excess": excess, "max_gap": gap, "passed": biconjugate_ok},
            "dual_residuals": residuals,
        }
        artifacts.append(self.writer.write_document("legendre", summary))
        logger.info("legendre %s: grade dual %s", spec.name, dual.shape)
        return RunOutcome(
            command="legendre",
            passed=biconjugate_ok and residuals_ok,
            artifacts=artifacts,
            summary=summary,
        )
