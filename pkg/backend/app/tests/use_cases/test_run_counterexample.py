"""
Testes unitários para o caso de uso RunCounterexampleUseCase.
"""
import pytest

from app.application.use_cases.experiments.run_counterexample import RunCounterexampleUseCase
from app.core.exceptions import ConfigError
from app.infrastructure.repositories.builtin_problem_repository import BuiltinProblemRepository
from app.schemas.run_config import validate_config
from app.tests.fakes.fake_problem_repository import FakeProblemRepository
from app.tests.fakes.fake_result_writer import FakeResultWriter


class TestRunCounterexampleUseCase:
    """
    Testes para o caso de uso dos contraexemplos de convexidade.
    """

    def setup_method(self):
        builtin = BuiltinProblemRepository()
        self.repository = FakeProblemRepository([
            builtin.get("ce_1d"),
            builtin.get("ce_radial"),
            builtin.get("stationary_quadratic"),
        ])
        self.writer = FakeResultWriter()
        self.use_case = RunCounterexampleUseCase(self.repository, self.writer)

    def test_one_dimensional(self):
        config = validate_config({
            "command": "counterexample",
            "problem": "ce_1d",
            "h": 0.0625,
            "T": 0.5,
            "counterexample": {"amplitudes": [1.0], "search": False},
        })

        # Executar o caso de uso
        outcome = self.use_case.execute(config)

        assert outcome.passed
        document = self.writer.documents["counterexample"]
        assert document["checks"] == {"rho_endpoints": True, "only_p3_fails": True}
        assert document["details"]["failed_conditions"] == ["P3"]
        assert document["convex"]
        assert document["threshold"] is None
        assert self.writer.column("sweep", "A") == [1.0]
        assert self.writer.column("sweep", "psi_at_r0") == [None]

    def test_radial(self):
        config = validate_config({
            "command": "counterexample",
            "problem": "ce_radial",
            "h": 0.125,
            "T": 0.5,
            "counterexample": {"amplitudes": [1.0, 2.0], "search": False},
        })

        outcome = self.use_case.execute(config)

        assert outcome.passed
        assert outcome.summary["checks"] == {"boundary_invariance": True, "psi_decreasing": True}
        psi = self.writer.column("sweep", "psi_at_r0")
        assert psi[1] < psi[0]

    def test_amplitude_from_config(self):
        config = validate_config({
            "command": "counterexample",
            "problem": "ce_1d",
            "h": 0.0625,
            "T": 0.5,
            "counterexample": {"A": 2.0, "B": 1.5, "amplitudes": [], "search": False},
        })

        self.use_case.execute(config)

        document = self.writer.documents["counterexample"]
        assert document["A"] == 2.0
        assert document["B"] == 1.5
        assert self.writer.tables["sweep"][1] == []

    def test_not_a_counterexample(self):
        config = validate_config({"command": "counterexample", "problem": "stationary_quadratic"})

        with pytest.raises(ConfigError):
            self.use_case.execute(config)
