"""
Testes da interface de linha de comando.
"""
import json

import pytest

from app.api import cli
from app.domain.results.entities import RunOutcome
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.schemas.run_config import validate_config
from app.tests.fakes.fake_problem_repository import FakeProblemRepository
from app.tests.fakes.fake_result_writer import FakeResultWriter


class _FailingChecksUseCase:
    def __init__(self, repository, writer):
        self.writer = writer

    def execute(self, config):
        return RunOutcome(command=config.command, passed=False)


class TestRun:
    """
    Testes dos códigos de saída de cli.run.
    """

    def setup_method(self):
        self.repository = FakeProblemRepository([BuiltinProblemRepository().get("stationary_quadratic")])
        self.writer = FakeResultWriter()

    def test_success(self):
        config = validate_config({"command": "solve", "problem": "stationary_quadratic", "h": 0.25, "T": 0.01})

        code = cli.run(config, self.repository, self.writer)

        assert code == cli.EXIT_OK
        assert "solve" in self.writer.documents
        assert self.writer.failures == []

    def test_unknown_problem_writes_failure(self):
        config = validate_config({"command": "solve", "problem": "inexistente"})

        code = cli.run(config, self.repository, self.writer)

        assert code == cli.EXIT_ERROR
        assert self.writer.documents["failure"]["error"] == "UnknownProblem"

    def test_failed_checks(self, monkeypatch):
        monkeypatch.setitem(cli.USE_CASES, "verify", _FailingChecksUseCase)
        config = validate_config({"command": "verify", "problem": "stationary_quadratic"})

        assert cli.run(config, self.repository, self.writer) == cli.EXIT_CHECK_FAILED

    def test_config_error_writes_failure(self):
        config = validate_config({"command": "counterexample", "problem": "stationary_quadratic"})

        assert cli.run(config, self.repository, self.writer) == cli.EXIT_ERROR
        assert self.writer.documents["failure"]["error"] == "ConfigError"


class TestParser:

    def test_arguments(self):
        args = cli.build_parser().parse_args(["verify", "--config", "c.json", "--h", "0.0625", "--seed", "7"])
        assert args.command == "verify"
        assert args.h == 0.0625
        assert args.seed == 7
        assert args.T is None
        assert args.out is None

    def test_help_documents_boundary_snapping(self):
        help_text = " ".join(cli.build_parser().format_help().split())
        assert "snap_fraction = 0.25" in help_text
        assert "Dirichlet" in help_text

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args(["plot", "--config", "c.json"])


class TestMain:
    """
    Execução completa a partir de um arquivo de configuração.
    """

    def test_solve_writes_artifacts(self, tmp_path):
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps({"problem": "stationary_quadratic"}), encoding="utf-8")
        out = tmp_path / "out"

        code = cli.main(["solve", "--config", str(config_path), "--out", str(out), "--h", "0.25", "--T", "0.01"])

        assert code == cli.EXIT_OK
        written = json.loads((out / "config.json").read_text(encoding="utf-8"))
        assert written["h"] == 0.25
        assert written["T"] == 0.01
        assert written["command"] == "solve"
        header = (out / "diagnostics.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == f"# config_hash={written['config_hash']}"

    def test_invalid_config_writes_failure(self, tmp_path):
        config_path = tmp_path / "run.json"
        config_path.write_text('{"problem": "stationary_quadratic", "h": -1}', encoding="utf-8")
        out = tmp_path / "out"

        code = cli.main(["solve", "--config", str(config_path), "--out", str(out)])

        assert code == cli.EXIT_ERROR
        failure = json.loads((out / "failure.json").read_text(encoding="utf-8"))
        assert failure["error"] == "RangeError"

    def test_repeated_runs_are_byte_identical(self, tmp_path):
        """
        Testa que duas execuções com a mesma configuração gravam os mesmos bytes.
        """
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps({
            "problem": "stationary_quadratic",
            "seed": 5,
            "tolerances": {"comparison_pairs": 3, "holder_pairs": 500},
        }), encoding="utf-8")
        out = tmp_path / "out"
        argv = ["verify", "--config", str(config_path), "--out", str(out), "--h", "0.125", "--T", "0.02"]

        assert cli.main(argv) == cli.EXIT_OK
        first = {path.name: path.read_bytes() for path in sorted(out.iterdir())}
        assert cli.main(argv) == cli.EXIT_OK
        second = {path.name: path.read_bytes() for path in sorted(out.iterdir())}

        assert {"config.json", "report.json", "diagnostics.csv"} <= set(first)
        assert first == second
