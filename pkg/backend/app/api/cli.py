"""
Interface de linha de comando do pmaflow.

Códigos de saída: 0 quando todas as verificações asseridas passam, 1 quando
alguma falha, 2 em erro (com failure.json no diretório de saída).
"""
import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional

from dotenv import load_dotenv

from app.application.use_cases.experiments.convergence_study import ConvergenceStudyUseCase
from app.application.use_cases.experiments.legendre_transform import LegendreTransformUseCase
from app.application.use_cases.experiments.run_counterexample import RunCounterexampleUseCase
from app.application.use_cases.experiments.solve_problem import SolveProblemUseCase
from app.application.use_cases.experiments.verify_estimates import VerifyEstimatesUseCase
from app.core.config import get_settings
from app.core.exceptions import PMAFlowError
from app.core.logging_config import configure_logging
from app.domain.problem.interfaces import ProblemRepository
from app.domain.results.interfaces import ResultWriter
from app.infrastructure.adapters.result_writer import FileResultWriter
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.schemas.run_config import COMMANDS, RunConfig, SolverSection, apply_overrides, config_hash, parse_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

SNAP_NOTE = (
    "Grade: com solver.snap_fraction = {snap:g} (padrão), nós da rede a menos dessa fração de um braço "
    "cheio da fronteira viram âncoras de Dirichlet com valor φ, fora de ∂Ω. Use solver.snap_fraction = 0 "
    "para nós de fronteira exatamente sobre ∂Ω."
)

USE_CASES: Dict[str, Callable[[ProblemRepository, ResultWriter], object]] = {
    "solve": SolveProblemUseCase,
    "verify": VerifyEstimatesUseCase,
    "legendre": LegendreTransformUseCase,
    "counterexample": RunCounterexampleUseCase,
    "convergence": ConvergenceStudyUseCase,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmaflow",
        description="Solver e laboratório de verificação para Monge-Ampère parabólica e fluxo de Gauss",
        epilog=SNAP_NOTE.format(snap=SolverSection.model_fields["snap_fraction"].default),
    )
    parser.add_argument("command", choices=COMMANDS, help="Comando a executar")
    parser.add_argument("--config", required=True, type=Path, help="Configuração JSON")
    parser.add_argument("--out", type=Path, default=None, help="Diretório de saída")
    parser.add_argument("--h", type=float, default=None, help="Espaçamento da grade (ver solver.snap_fraction abaixo)")
    parser.add_argument("--T", type=float, default=None, help="Horizonte de tempo")
    parser.add_argument("--seed", type=int, default=None, help="Semente da amostragem")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """
    Lê o arquivo de configuração e aplica as substituições da linha de comando.
    """
    text = args.config.read_text(encoding="utf-8")
    config = parse_config(text, defaults={"command": args.command})
    return apply_overrides(
        config,
        command=args.command,
        h=args.h,
        T=args.T,
        seed=args.seed,
        out=str(args.out) if args.out is not None else None,
    )


def run(config: RunConfig, repository: Optional[ProblemRepository] = None, writer: Optional[ResultWriter] = None) -> int:
    """
    Executa o comando da configuração e devolve o código de saída.
    """
    repository = repository or BuiltinProblemRepository()
    if writer is None:
        out_dir = Path(config.out or get_settings().output_dir)
        writer = FileResultWriter(out_dir, config_hash(config))
    try:
        outcome = USE_CASES[config.command](repository, writer).execute(config)
    except (PMAFlowError, ValueError) as error:
        logger.error("%s falhou: %s: %s", config.command, type(error).__name__, error)
        writer.write_failure(error)
        return EXIT_ERROR
    if not outcome.passed:
        logger.warning("%s: verificações asseridas falharam", config.command)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    settings = get_settings()
    configure_logging(settings.log_level)
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except (PMAFlowError, OSError) as error:
        logger.error("Configuração inválida: %s: %s", type(error).__name__, error)
        out_dir = args.out or Path(settings.output_dir)
        FileResultWriter(out_dir, "").write_failure(error)
        return EXIT_ERROR
    return run(config)
