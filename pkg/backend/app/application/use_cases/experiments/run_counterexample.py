"""
Caso de uso do comando counterexample.
"""
import logging

from app.application.use_cases.experiments.problem_factory import resolve_problem
from app.core.exceptions import ConfigError
from app.domain.counterexample.entities import RadialProblem
from app.domain.counterexample.value_objects.bump_params import BumpParams
from app.domain.problem.interfaces import ProblemRepository
from app.domain.results.entities import RunOutcome
from app.domain.results.interfaces import ResultWriter
from app.schemas.run_config import RunConfig
from app.services.counterexample_service import (
    UNDERFLOW_LEVEL,
    run_counterexample_1d,
    run_counterexample_radial,
)

logger = logging.getLogger(__name__)


class RunCounterexampleUseCase:
    """
    Caso de uso para os experimentos de perda de convexidade (1D e radial).

    Asserções: ρ nula nas extremidades no caso 1D; Ψ = ψ em r = 1 e Ψ(r₀)
    decrescente em A no caso radial. Os limiares A* são apenas relatados.
    """

    def __init__(self, repository: ProblemRepository, writer: ResultWriter):
        self.repository = repository
        self.writer = writer

    def execute(self, config: RunConfig) -> RunOutcome:
        """
        Executa o caso de uso.

        Raises:
            ConfigError: Se o problema não tiver perturbação definida
        """
        spec = resolve_problem(config, self.repository)
        section = config.counterexample
        params = BumpParams.create(section.A, section.B)

        if spec.is_one_dimensional:
            report = run_counterexample_1d(
                spec, params, config.h, amplitudes=section.amplitudes, search=section.search, stride=section.stride,
            )
            checks = {
                "rho_endpoints": report.details["rho_endpoint_max"] <= UNDERFLOW_LEVEL,
                "only_p3_fails": report.details["failed_conditions"] == ["P3"],
            }
        elif spec.radial_dimension is not None:
            problem = RadialProblem.from_spec(spec)
            problem.bump = params
            report = run_counterexample_radial(problem, config.h, amplitudes=section.amplitudes, search=section.search)
            checks = {
                "boundary_invariance": report.details["boundary_gap_max"] <= UNDERFLOW_LEVEL,
                "psi_decreasing": report.details["psi_decreasing"],
            }
        else:
            raise ConfigError(f"Problema {spec.name} não é um contraexemplo (1D ou radial)")

        rows = ([row["A"], row["min_second_derivative"], row["psi_at_r0"]] for row in report.rows)
        artifacts = [
            self.writer.write_document("config", config.resolved()),
            self.writer.write_table("sweep", ("A", "min_second_derivative", "psi_at_r0"), rows),
            self.writer.write_document("counterexample", {"problem": spec.name, "checks": checks, **report.to_dict()}),
        ]
        logger.info(
            "counterexample %s: min=%.6g em (%.4g, %.4g), A*=%s",
            spec.name, report.min_second_derivative, report.location_x, report.location_t, report.threshold,
        )
        return RunOutcome(
            command="counterexample",
            passed=all(checks.values()),
            artifacts=artifacts,
            summary={"checks": checks, "report": report},
        )
