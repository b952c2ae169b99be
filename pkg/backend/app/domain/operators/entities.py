"""
Entidades dos operadores discretos.
"""
from dataclasses import dataclass

import numpy as np


@dataclass
class HessianField:
    """
    Hessiana simétrica 2x2 e gradiente por nó interior.

    A simetria é exata por construção: só a entrada fora da diagonal xy é guardada.

    Attributes:
        xx: Derivada segunda em x₁
        xy: Derivada mista
        yy: Derivada segunda em x₂
        gradient: Gradiente, formato (N, 2)
    """
    xx: np.ndarray
    xy: np.ndarray
    yy: np.ndarray
    gradient: np.ndarray

    @property
    def determinant(self) -> np.ndarray:
        return self.xx * self.yy - self.xy * self.xy

    @property
    def trace(self) -> np.ndarray:
        return self.xx + self.yy

    def matrices(self) -> np.ndarray:
        """
        Matrizes completas, formato (N, 2, 2).
        """
        return np.stack([
            np.stack([self.xx, self.xy], axis=-1),
            np.stack([self.xy, self.yy], axis=-1),
        ], axis=-2)
