"""
Dado ψ + ρ: a forçante base acrescida do termo induzido pela perturbação.
"""
from dataclasses import dataclass

import numpy as np

from app.domain.counterexample.value_objects.bump_params import BumpParams
from app.domain.problem.interfaces import ScalarData


@dataclass(frozen=True)
class BumpForcing(ScalarData):
    """
    ψ(x, t) + ρ(x₁, t), com ρ = -w_t + w_xx na primeira coordenada.

    Como ρ e todas as suas derivadas se anulam em x₁ ∈ {0, 1}, as condições
    de fronteira do problema base não mudam.
    """
    base: ScalarData
    params: BumpParams

    def evaluate(self, points: np.ndarray, t: float) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return self.base.evaluate(points, t) + np.asarray(self.params.rho(points[..., 0], t))

    def describe(self) -> str:
        return f"{self.base.describe()} + rho(A={self.params.a!r}, B={self.params.b!r})"
