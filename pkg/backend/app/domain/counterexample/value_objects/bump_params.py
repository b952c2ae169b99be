"""
Value Object da perturbação w(x, t) = A·t·exp(-B/(x²(1-x)²)).

Todas as derivadas em x têm a forma A·t·e^E·N_k(x)/q^{m_k}, com q = x(1-x)
e E = -B/q²; fora do suporte numérico (e^E = 0) os valores são exatamente 0,
o que também define a extensão suave em x ∈ {0, 1}.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial

_Q = Polynomial([0.0, 1.0, -1.0])


def p6(x, b: float):
    """
    Avalia P₆(x) = 2B - 8Bx + (8B-3)x² + 16x³ - 33x⁴ + 30x⁵ - 10x⁶ por Horner.

    Args:
        x: Ponto(s) de avaliação
        b: Parâmetro B

    Returns:
        Valor do polinômio (escalar ou array, conforme x)
    """
    x = np.asarray(x, dtype=float)
    result = np.full_like(x, -10.0)
    for coef in (30.0, -33.0, 16.0, 8.0 * b - 3.0, -8.0 * b, 2.0 * b):
        result = result * x + coef
    return result if result.ndim else float(result)


@lru_cache(maxsize=64)
def _numerator(order: int, b: float) -> Tuple[Polynomial, int]:
    """
    Numerador N_k e expoente m_k de ∂ᵏ e^E = e^E·N_k/q^{m_k}.

    N_{k+1} = 2B q' N_k + q³ N_k' - m_k q² q' N_k, m_{k+1} = m_k + 3.
    """
    if order == 0:
        return Polynomial([1.0]), 0
    prev, m = _numerator(order - 1, b)
    dq = _Q.deriv()
    nxt = 2.0 * b * dq * prev + _Q ** 3 * prev.deriv() - m * _Q ** 2 * dq * prev
    return nxt, m + 3


@dataclass(frozen=True)
class BumpParams:
    """
    Amplitude A e nitidez B da perturbação.
    """
    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"Amplitude A deve ser positiva: {self.a!r}")
        if not (np.isfinite(self.b) and self.b > 0.0):
            raise ValueError(f"Nitidez B deve ser positiva: {self.b!r}")

    @staticmethod
    def create(a: float = 1.0, b: float = 1.0) -> 'BumpParams':
        return BumpParams(float(a), float(b))

    def with_amplitude(self, a: float) -> 'BumpParams':
        return BumpParams(float(a), self.b)

    def _envelope(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """
        (e^E, q) com e^E = 0 onde q = 0 ou onde a exponencial sub-transborda.
        """
        x = np.asarray(x, dtype=float)
        q = x * (1.0 - x)
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            exponent = np.where(q != 0.0, -self.b / np.where(q != 0.0, q * q, 1.0), -np.inf)
            envelope = np.exp(exponent)
        return envelope, q

    def _combine(self, factor, envelope: np.ndarray, q: np.ndarray, numerator: np.ndarray, power: int):
        positive = envelope > 0.0
        safe_q = np.where(positive, q, 1.0)
        value = np.where(positive, factor * envelope * numerator / safe_q ** power, 0.0)
        return value if value.ndim else float(value)

    def w(self, x, t):
        """
        w(x, t) = A·t·e^E.
        """
        envelope, _ = self._envelope(x)
        value = self.a * np.asarray(t, dtype=float) * envelope
        return value if np.ndim(value) else float(value)

    def w_t(self, x, t=None):
        envelope, _ = self._envelope(x)
        value = self.a * envelope
        return value if np.ndim(value) else float(value)

    def w_x(self, x, t):
        """
        w_x = 2ABt·e^E·(1-2x)/q³.
        """
        envelope, q = self._envelope(x)
        x = np.asarray(x, dtype=float)
        return self._combine(2.0 * self.a * self.b * np.asarray(t, dtype=float), envelope, q, 1.0 - 2.0 * x, 3)

    def w_xx(self, x, t):
        """
        w_xx = 2ABt·e^E·P₆(x)/(x⁶(x-1)⁶).
        """
        envelope, q = self._envelope(x)
        return self._combine(
            2.0 * self.a * self.b * np.asarray(t, dtype=float), envelope, q, p6(x, self.b), 6,
        )

    def rho(self, x, t):
        """
        ρ = -w_t + w_xx, a forçante que a perturbação acrescenta a ψ.
        """
        value = np.asarray(self.w_xx(x, t)) - np.asarray(self.w_t(x, t))
        return value if value.ndim else float(value)

    def derivative(self, x, t, order: int):
        """
        ∂ᵏw/∂xᵏ para qualquer ordem k ≥ 0, pela recursão dos numeradores.

        Args:
            x: Ponto(s) em [0, 1]
            t: Instante
            order: Ordem k

        Returns:
            Valor da derivada (0 exato onde e^E sub-transborda)
        """
        if order < 0:
            raise ValueError(f"Ordem de derivada negativa: {order}")
        numerator, power = _numerator(int(order), float(self.b))
        envelope, q = self._envelope(x)
        x = np.asarray(x, dtype=float)
        return self._combine(self.a * np.asarray(t, dtype=float), envelope, q, numerator(x), power)
