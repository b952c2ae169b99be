"""
Caso de uso do comando convergence: erros L∞ e ordens observadas contra a solução exata.
"""
import logging
import math
from typing import Any, Dict, List

import numpy as np

from app.application.use_cases.experiments.problem_factory import output_times, resolve_grid, resolve_problem
from app.core.exceptions import ConfigError
from app.domain.problem.interfaces import ProblemRepository
from app.domain.results.entities import RunOutcome
from app.domain.results.interfaces import ResultWriter
from app.schemas.run_config import RunConfig
from app.services.stepper_service import solve

logger = logging.getLogger(__name__)

MIN_ORDER = 0.9


def observed_orders(levels: List[float], errors: List[float], floor: float) -> List[Dict[str, Any]]:
    """
    Tabela (h, erro, ordem observada, exato ao arredondamento).

    A ordem log(e_{k-1}/e_k)/log(h_{k-1}/h_k) só é calculada quando os dois
    erros estão acima do piso de arredondamento.
    """
    rows = []
    for k, (h, error) in enumerate(zip(levels, errors)):
        order = None
        if k > 0 and errors[k - 1] >= floor and error >= floor:
            order = math.log(errors[k - 1] / error) / math.log(levels[k - 1] / h)
        rows.append({"h": h, "linf_error": error, "observed_order": order, "exact_to_rounding": error < floor})
    return rows


def finest_order_ok(rows: List[Dict[str, Any]]) -> bool:
    """
    A ordem entre os dois níveis mais finos é pelo menos MIN_ORDER.

    Sem ordem calculável (nível único ou erro no piso) o critério não se aplica.
    """
    order = rows[-1]["observed_order"] if rows else None
    return order is None or order >= MIN_ORDER


class ConvergenceStudyUseCase:
    """
    Caso de uso para o estudo de convergência em refinamentos sucessivos de h.
    """

    def __init__(self, repository: ProblemRepository, writer: ResultWriter):
        self.repository = repository
        self.writer = writer

    def execute(self, config: RunConfig) -> RunOutcome:
        """
        Executa o caso de uso.

        passed quando a coluna de erros é monótona (ou exata ao arredondamento)
        e a ordem entre os dois níveis mais finos é pelo menos MIN_ORDER.

        Raises:
            ConfigError: Se o problema não tiver solução exata
        """
        spec = resolve_problem(config, self.repository)
        if spec.exact is None:
            raise ConfigError(f"Problema {spec.name} não tem solução exata para o estudo de convergência")

        levels = sorted(config.levels, reverse=True)
        errors = []
        for h in levels:
            grid = resolve_grid(spec, config, h=h)
            trace = solve(
                spec,
                grid,
                output_times=output_times(spec, config),
                stencil=config.solver.stencil,
                safety=config.solver.safety,
                scheme=config.solver.scheme,
                validate=False,
            )
            error = max(
                float(np.max(np.abs(u.interior - spec.exact_at(grid.interior_points, t))))
                for t, u in zip(trace.times, trace.snapshots)
            )
            logger.info("Convergência %s: h=%g erro=%.3e (%d passos)", spec.name, h, error, trace.n_steps)
            errors.append(error)

        floor = config.tolerances.convergence_floor
        rows = observed_orders(levels, errors, floor)
        monotone = all(
            later["linf_error"] <= earlier["linf_error"] or later["exact_to_rounding"]
            for earlier, later in zip(rows, rows[1:])
        )
        passed = monotone and finest_order_ok(rows)

        table = ([r["h"], r["linf_error"], r["observed_order"], r["exact_to_rounding"]] for r in rows)
        artifacts = [
            self.writer.write_document("config", config.resolved()),
            self.writer.write_table("convergence", ("h", "linf_error", "observed_order", "exact_to_rounding"), table),
            self.writer.write_document("convergence", {"problem": spec.name, "rows": rows, "monotone": monotone, "passed": passed}),
        ]
        return RunOutcome(command="convergence", passed=passed, artifacts=artifacts, summary={"rows": rows})
