"""
Entidades de domínio para problemas de valor inicial e de fronteira.
"""
from dataclasses import asdict, dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, Optional

import numpy as np

from app.domain.geometry.entities import Domain

if TYPE_CHECKING:
    from app.domain.counterexample.value_objects.bump_params import BumpParams
    from app.domain.problem.interfaces import ScalarData


class EquationKind(str, Enum):
    """
    Tipo de equação: Monge-Ampère parabólica ou fluxo por curvatura de Gauss (γ).
    """
    PMA = "pma"
    GCF = "gcf"


class ProblemSpec:
    """
    Entidade que reúne os dados de um problema: ψ, φ, c₀, horizonte T e domínio.

    Problemas unidimensionais (dimension = 1) vivem em (0, 1) e não têm Domain;
    seus dados leem apenas a primeira coordenada dos pontos.
    """

    def __init__(
        self,
        name: str,
        kind: EquationKind,
        horizon: float,
        psi: "ScalarData",
        phi: "ScalarData",
        c0: float,
        domain: Optional[Domain] = None,
        gamma: float = 1.0,
        exact: Optional["ScalarData"] = None,
        dimension: int = 2,
        bump: Optional["BumpParams"] = None,
        radial_dimension: Optional[int] = None,
        description: str = "",
    ):
        self.name = name
        self.kind = EquationKind(kind)
        self.horizon = float(horizon)
        self.psi = psi
        self.phi = phi
        self.c0 = float(c0)
        self.domain = domain
        self.gamma = float(gamma)
        self.exact = exact
        self.dimension = int(dimension)
        self.bump = bump
        self.radial_dimension = radial_dimension
        self.description = description
        self._validate()

    def _validate(self) -> None:
        """
        Garante T > 0, c₀ > 0 e γ ∈ (0, 1] para o fluxo de Gauss.

        Raises:
            ValueError: Se algum invariante for violado
        """
        if not (np.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"Horizonte T deve ser positivo: {self.horizon!r}")
        if not (np.isfinite(self.c0) and self.c0 > 0.0):
            raise ValueError(f"c0 deve ser positivo: {self.c0!r}")
        if self.kind == EquationKind.GCF and not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"Expoente gamma deve estar em (0, 1]: {self.gamma!r}")
        if self.dimension not in (1, 2):
            raise ValueError(f"Dimensão espacial não suportada: {self.dimension}")
        if self.dimension == 2 and self.domain is None:
            raise ValueError("Problemas bidimensionais exigem um domínio")
        if self.radial_dimension is not None and self.radial_dimension < 2:
            raise ValueError(f"Dimensão radial deve ser >= 2: {self.radial_dimension}")

    @property
    def is_one_dimensional(self) -> bool:
        return self.dimension == 1

    def psi_at(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.psi.evaluate(points, t)

    def phi_at(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.phi.evaluate(points, t)

    def exact_at(self, points: np.ndarray, t: float) -> np.ndarray:
        """
        Solução exata anexada (problemas manufaturados).

        Raises:
            ValueError: Se o problema não tiver solução exata
        """
        if self.exact is None:
            raise ValueError(f"Problema {self.name} não tem solução exata anexada")
        return self.exact.evaluate(points, t)

    def replace(self, **changes: Any) -> 'ProblemSpec':
        """
        Cópia com campos substituídos (revalidada).
        """
        fields = {
            "name": self.name,
            "kind": self.kind,
            "horizon": self.horizon,
            "psi": self.psi,
            "phi": self.phi,
            "c0": self.c0,
            "domain": self.domain,
            "gamma": self.gamma,
            "exact": self.exact,
            "dimension": self.dimension,
            "bump": self.bump,
            "radial_dimension": self.radial_dimension,
            "description": self.description,
        }
        fields.update(changes)
        return ProblemSpec(**fields)

    def describe(self) -> Dict[str, Any]:
        """
        Resumo estável do problema para os artefatos de saída.
        """
        return {
            "name": self.name,
            "kind": self.kind.value,
            "T": self.horizon,
            "c0": self.c0,
            "gamma": self.gamma if self.kind == EquationKind.GCF else None,
            "psi": self.psi.describe(),
            "phi": self.phi.describe(),
            "exact": self.exact.describe() if self.exact is not None else None,
            "dimension": self.dimension,
            "domain": self.domain.describe() if self.domain is not None else {"interval": [0.0, 1.0]},
        }


@dataclass
class ConditionReport:
    """
    Margens amostradas das condições (P1)-(P3).

    p3_max_concavity_violation é None quando (P3) não se aplica (fluxo de Gauss).
    """
    p1_margin: float
    p2_min_eig: float
    p3_max_concavity_violation: Optional[float]
    n_boundary_samples: int
    n_interior_samples: int
    n_time_samples: int
    tolerance: float

    @property
    def p1_pass(self) -> bool:
        return self.p1_margin >= -self.tolerance

    @property
    def p2_pass(self) -> bool:
        return self.p2_min_eig > self.tolerance

    @property
    def p3_pass(self) -> Optional[bool]:
        if self.p3_max_concavity_violation is None:
            return None
        return self.p3_max_concavity_violation <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.p1_pass and self.p2_pass and self.p3_pass is not False

    def failed_conditions(self) -> list:
        failed = []
        if not self.p1_pass:
            failed.append("P1")
        if not self.p2_pass:
            failed.append("P2")
        if self.p3_pass is False:
            failed.append("P3")
        return failed

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(p1_pass=self.p1_pass, p2_pass=self.p2_pass, p3_pass=self.p3_pass)
        return data


@dataclass
class CompatibilityReport:
    """
    Resíduo da condição de compatibilidade de ordem 1 sobre ∂Ω em t = 0.
    """
    residual: float
    tolerance: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data
