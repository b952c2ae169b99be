"""
Entidades dos contraexemplos de convexidade (problemas reduzidos 1D e radial).
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from app.domain.counterexample.value_objects.bump_params import BumpParams
from app.domain.problem.entities import ProblemSpec
from app.domain.problem.interfaces import ScalarData


def line_points(x: np.ndarray) -> np.ndarray:
    """
    Pontos (N, 2) sobre o raio x₂ = 0, formato aceito pelos dados escalares.
    """
    x = np.asarray(x, dtype=float)
    return np.stack([x, np.zeros_like(x)], axis=-1)


class RadialProblem:
    """
    -v_t + (v_r/r)^{n-1}·v_rr = ψ(r, t) em (0, 1) x (0, T], perfil radial de um
    problema em B₁(0) ⊂ ℝⁿ.

    Os dados ψ e φ são lidos sobre o raio x₂ = 0 (primeira coordenada = r).
    """

    def __init__(
        self,
        dimension: int,
        psi: ScalarData,
        phi: ScalarData,
        horizon: float,
        bump: Optional[BumpParams] = None,
        name: str = "radial",
    ):
        if int(dimension) != dimension or dimension < 2:
            raise ValueError(f"Dimensão radial deve ser um inteiro >= 2: {dimension!r}")
        if not horizon > 0.0:
            raise ValueError(f"Horizonte T deve ser positivo: {horizon!r}")
        self.dimension = int(dimension)
        self.psi = psi
        self.phi = phi
        self.horizon = float(horizon)
        self.bump = bump
        self.name = name

    @staticmethod
    def from_spec(spec: ProblemSpec) -> 'RadialProblem':
        """
        Problema radial a partir de um ProblemSpec com radial_dimension definido.

        Raises:
            ValueError: Se o problema não for radial
        """
        if spec.radial_dimension is None:
            raise ValueError(f"Problema {spec.name} não define dimensão radial")
        return RadialProblem(spec.radial_dimension, spec.psi, spec.phi, spec.horizon, spec.bump, spec.name)

    def psi_at(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.broadcast_to(self.psi.evaluate(line_points(r), t), np.shape(r))

    def phi_at(self, r: np.ndarray, t: float) -> np.ndarray:
        return np.broadcast_to(self.phi.evaluate(line_points(r), t), np.shape(r))


@dataclass
class ReducedTrace:
    """
    Traço de um solver reduzido (1D ou radial) em nós uniformes de [0, 1].

    Para cada passo aceito (e para o estado final) guarda o mínimo e o máximo da
    medida de convexidade: u_xx em 1D, min(v_rr, v_r/r) no caso radial. Campos
    dessa medida podem ser gravados a cada `stride` passos.
    """
    nodes: np.ndarray
    dt: float
    times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    record_times: List[float] = field(default_factory=list)
    min_second: List[float] = field(default_factory=list)
    max_second: List[float] = field(default_factory=list)
    min_location: List[float] = field(default_factory=list)
    second_fields: List[np.ndarray] = field(default_factory=list)
    negative_slope: bool = False

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    def record(self, t: float, second: np.ndarray, where: np.ndarray, keep_field: bool) -> None:
        k = int(np.argmin(second))
        self.record_times.append(float(t))
        self.min_second.append(float(second[k]))
        self.max_second.append(float(np.max(second)))
        self.min_location.append(float(where[k]))
        if keep_field:
            self.second_fields.append(second.copy())

    def overall_minimum(self) -> Dict[str, float]:
        """
        Mínimo da medida de convexidade sobre Q_T e onde ocorre.
        """
        k = int(np.argmin(self.min_second))
        return {"value": self.min_second[k], "x": self.min_location[k], "t": self.record_times[k]}


@dataclass
class ConvexityLossReport:
    """
    Resultado de um experimento de perda de convexidade.

    Attributes:
        a: Amplitude A usada na solução direta
        b: Nitidez B
        h: Espaçamento
        dt: Passo de tempo
        min_second_derivative: Mínimo da medida de convexidade sobre a execução
        location_x: Coordenada (x ou r) do mínimo
        location_t: Instante do mínimo
        threshold: A* da busca por duplicação e bissecção (depende da grade)
        rows: Tabela da varredura em A
        details: Medidas auxiliares (superposição, ρ nas extremidades, ajuste de Ψ)
    """
    a: float
    b: float
    h: float
    dt: float
    min_second_derivative: float
    location_x: float
    location_t: float
    threshold: Optional[float] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def convex(self) -> bool:
        return self.min_second_derivative > 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": self.a,
            "B": self.b,
            "h": self.h,
            "dt": self.dt,
            "min_second_derivative": self.min_second_derivative,
            "location_x": self.location_x,
            "location_t": self.location_t,
            "convex": self.convex,
            "threshold": self.threshold,
            "threshold_note": "dependente da grade" if self.threshold is not None else "",
            "rows": self.rows,
            "details": self.details,
        }
