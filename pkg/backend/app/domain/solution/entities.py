"""
Entidades de domínio para a integração temporal.
"""
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import numpy as np

from app.domain.geometry.entities import Grid, GridFunction
from app.domain.problem.entities import ProblemSpec


@dataclass
class SolverState:
    """
    Estado do integrador: instante, campo u, contador de passos e último dt.
    """
    t: float
    u: GridFunction
    step: int = 0
    last_dt: float = 0.0


@dataclass
class StepDiagnostics:
    """
    Diagnósticos de um passo aceito, medidos no campo do início do passo.

    Attributes:
        step: Índice do passo
        t: Instante de início do passo
        dt: Incremento aceito
        min_ut_psi: Mínimo de (quociente de atualização + ψ) no interior
        max_ut_psi: Máximo do mesmo
        min_lambda: Menor autovalor da Hessiana central no interior
        max_lambda: Maior autovalor no interior
        min_lambda_boundary: Menor autovalor nos nós adjacentes à fronteira
        max_lambda_boundary: Maior autovalor nos nós adjacentes à fronteira
        min_mah: Mínimo de MA_h[u]
        cfl_ratio: dt vezes a cota de Lipschitz do operador
        min_u: Mínimo de u no interior
        max_u: Máximo de u no interior
        max_gradient: Máximo de |Du| no interior
    """
    step: int
    t: float
    dt: float
    min_ut_psi: float
    max_ut_psi: float
    min_lambda: float
    max_lambda: float
    min_lambda_boundary: float
    max_lambda_boundary: float
    min_mah: float
    cfl_ratio: float
    min_u: float
    max_u: float
    max_gradient: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DIAGNOSTIC_FIELDS = tuple(f.name for f in fields(StepDiagnostics))


@dataclass
class SolutionTrace:
    """
    Sequência de snapshots em instantes estritamente crescentes mais a série
    completa de diagnósticos.
    """
    spec: ProblemSpec
    grid: Grid
    times: List[float] = field(default_factory=list)
    snapshots: List[GridFunction] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    stencil: int = 2
    scheme: str = "monotone"

    def add_snapshot(self, t: float, u: GridFunction) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError(f"Snapshots fora de ordem: {t!r} após {self.times[-1]!r}")
        self.times.append(float(t))
        self.snapshots.append(u)

    @property
    def n_steps(self) -> int:
        return len(self.diagnostics)

    @property
    def final(self) -> GridFunction:
        return self.snapshots[-1]

    def column(self, name: str) -> np.ndarray:
        """
        Série temporal de um campo dos diagnósticos.
        """
        if name not in DIAGNOSTIC_FIELDS:
            raise KeyError(name)
        return np.array([getattr(d, name) for d in self.diagnostics], dtype=float)

    def step_sizes(self) -> np.ndarray:
        return self.column("dt")

    def snapshot_index(self, t: float) -> Optional[int]:
        for index, time in enumerate(self.times):
            if time == t:
                return index
        return None
