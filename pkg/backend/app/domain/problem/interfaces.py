"""
Interfaces abstratas do domínio de problemas.
Seguindo o Princípio de Inversão de Dependência (DIP).
"""
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

if TYPE_CHECKING:
    from app.domain.problem.entities import ProblemSpec

# Passo fixo das derivadas por diferenças finitas dos dados
H_FD = 1e-5


class ScalarData(ABC):
    """
    Dado escalar em forma fechada f(x, t).

    Pontos são sempre arrays (N, 2); dados unidimensionais ignoram a segunda coordenada.
    As derivadas padrão são diferenças centrais com passo H_FD; implementações
    com derivadas exatas devem sobrescrevê-las.
    """

    @abstractmethod
    def evaluate(self, points: np.ndarray, t: float) -> np.ndarray:
        """
        Avalia o dado em (N, 2) pontos no instante t.
        """

    def time_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        return (self.evaluate(points, t + H_FD) - self.evaluate(points, t - H_FD)) / (2.0 * H_FD)

    def hessian(self, points: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Hessiana espacial (xx, xy, yy) por diferenças centrais.
        """
        points = np.asarray(points, dtype=float)
        ex = np.array([H_FD, 0.0])
        ey = np.array([0.0, H_FD])
        f0 = self.evaluate(points, t)
        xx = (self.evaluate(points + ex, t) - 2.0 * f0 + self.evaluate(points - ex, t)) / H_FD ** 2
        yy = (self.evaluate(points + ey, t) - 2.0 * f0 + self.evaluate(points - ey, t)) / H_FD ** 2
        xy = (
            self.evaluate(points + ex + ey, t) - self.evaluate(points + ex - ey, t)
            - self.evaluate(points - ex + ey, t) + self.evaluate(points - ex - ey, t)
        ) / (4.0 * H_FD ** 2)
        return xx, xy, yy

    def describe(self) -> str:
        return self.__class__.__name__


class ProblemRepository(ABC):
    """
    Interface abstrata para a biblioteca de problemas.
    """

    @abstractmethod
    def get(self, name: str, params: Optional[Dict[str, Any]] = None) -> "ProblemSpec":
        """
        Busca um problema pelo nome.

        Args:
            name: Nome do problema
            params: Parâmetros opcionais do problema

        Returns:
            ProblemSpec: Especificação completa

        Raises:
            UnknownProblem: Se o nome não estiver na biblioteca
        """

    @abstractmethod
    def names(self) -> List[str]:
        """
        Lista os nomes disponíveis.
        """
