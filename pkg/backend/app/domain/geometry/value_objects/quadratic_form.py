"""
Value Object para a forma quadrática simétrica que descreve uma elipse.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from app.core.exceptions import NonConvexDomain


@dataclass(frozen=True)
class QuadraticForm:
    """
    Forma quadrática Q = [[q11, q12], [q12, q22]] simétrica definida positiva.

    A região {x : (x-c)ᵀQ(x-c) < 1} é uniformemente convexa exatamente quando
    os dois autovalores de Q são positivos.
    """
    q11: float
    q12: float
    q22: float

    def __post_init__(self):
        """
        Valida que a forma é definida positiva.
        """
        values = (self.q11, self.q12, self.q22)
        if not all(np.isfinite(values)):
            raise NonConvexDomain(f"Forma quadrática com entradas não finitas: {values}")
        lam_min, _ = self.eigenvalues()
        if lam_min <= 0.0:
            raise NonConvexDomain(
                f"Forma quadrática não é definida positiva (menor autovalor {lam_min!r})"
            )

    @staticmethod
    def create(matrix: Sequence[Sequence[float]]) -> 'QuadraticForm':
        """
        Cria a forma a partir de uma matriz 2x2 (a parte simétrica é usada).

        Args:
            matrix: Matriz 2x2

        Returns:
            QuadraticForm: Forma validada

        Raises:
            NonConvexDomain: Se algum autovalor for <= 0
        """
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise NonConvexDomain(f"Esperada matriz 2x2, recebido formato {m.shape}")
        return QuadraticForm(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]), float(m[1, 1]))

    @staticmethod
    def from_radius(radius: float) -> 'QuadraticForm':
        """
        Forma de um disco de raio dado.
        """
        if radius <= 0.0:
            raise NonConvexDomain(f"Raio deve ser positivo: {radius!r}")
        inv = 1.0 / (radius * radius)
        return QuadraticForm(inv, 0.0, inv)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])

    def eigenvalues(self) -> Tuple[float, float]:
        """
        Autovalores em ordem crescente pela fórmula fechada traço/discriminante.
        """
        half_trace = 0.5 * (self.q11 + self.q22)
        disc = np.hypot(0.5 * (self.q11 - self.q22), self.q12)
        return half_trace - disc, half_trace + disc

    def semi_axes(self) -> Tuple[float, float]:
        """
        Semi-eixos (maior, menor) da elipse unitária da forma.
        """
        lam_min, lam_max = self.eigenvalues()
        return 1.0 / np.sqrt(lam_min), 1.0 / np.sqrt(lam_max)

    def eccentricity(self) -> float:
        major, minor = self.semi_axes()
        return float(np.sqrt(max(0.0, 1.0 - (minor / major) ** 2)))

    def evaluate(self, d: np.ndarray) -> np.ndarray:
        """
        Avalia dᵀQd para vetores em um array de formato (..., 2).
        """
        d = np.asarray(d, dtype=float)
        x, y = d[..., 0], d[..., 1]
        return self.q11 * x * x + 2.0 * self.q12 * x * y + self.q22 * y * y

    def half_widths(self) -> Tuple[float, float]:
        """
        Meias-larguras da caixa envolvente: sqrt(diag(Q⁻¹)).
        """
        det = self.q11 * self.q22 - self.q12 * self.q12
        return float(np.sqrt(self.q22 / det)), float(np.sqrt(self.q11 / det))
