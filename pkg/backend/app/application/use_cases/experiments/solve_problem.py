"""
Caso de uso do comando solve.
"""
import logging

import numpy as np

from app.application.use_cases.experiments.problem_factory import output_times, resolve_grid, resolve_problem
from app.application.use_cases.experiments.trace_tables import snapshot_index_table, write_diagnostics, write_snapshots
from app.domain.problem.interfaces import ProblemRepository
from app.domain.results.entities import RunOutcome
from app.domain.results.interfaces import ResultWriter
from app.schemas.run_config import RunConfig
from app.services.stepper_service import solve

logger = logging.getLogger(__name__)


class SolveProblemUseCase:
    """
    Caso de uso para integrar um problema até T e gravar diagnósticos e snapshots.
    """

    def __init__(self, repository: ProblemRepository, writer: ResultWriter):
        """
        Inicializa o caso de uso com o repositório de problemas e o destino dos artefatos.

        Args:
            repository: Implementação de ProblemRepository
            writer: Implementação de ResultWriter
        """
        self.repository = repository
        self.writer = writer

    def execute(self, config: RunConfig) -> RunOutcome:
        """
        Executa o caso de uso.

        Args:
            config: Configuração resolvida

        Returns:
            RunOutcome: Artefatos gravados; solve não tem verificações asseridas

        Raises:
            StiffnessOverflow, NonFiniteField: Falhas do integrador
        """
        spec = resolve_problem(config, self.repository)
        grid = resolve_grid(spec, config)
        trace = solve(
            spec,
            grid,
            output_times=output_times(spec, config),
            stencil=config.solver.stencil,
            safety=config.solver.safety,
            scheme=config.solver.scheme,
        )

        artifacts = [self.writer.write_document("config", config.resolved())]
        artifacts.append(write_diagnostics(self.writer, trace))
        artifacts.extend(write_snapshots(self.writer, trace))

        summary = {
            "problem": spec.describe(),
            "grid": {"h": grid.h, "n_interior": grid.n_interior, "n_boundary": grid.n_boundary},
            "n_steps": trace.n_steps,
            "snapshots": snapshot_index_table(trace),
        }
        if spec.exact is not None:
            errors = [
                float(np.max(np.abs(u.values - spec.exact_at(grid.points, t))))
                for t, u in zip(trace.times, trace.snapshots)
            ]
            summary["linf_error"] = max(errors)
        artifacts.append(self.writer.write_document("solve", summary))
        logger.info("solve %s: %d passos", spec.name, trace.n_steps)
        return RunOutcome(command="solve", passed=True, artifacts=artifacts, summary=summary)
