"""
Operadores discretos de Monge-Ampère sobre grades com braços de corte.

Todas as funções são mapas puros por nó sobre campos imutáveis.
"""
from typing import Tuple, Union

import numpy as np

from app.core.exceptions import SingularHessian
from app.domain.geometry.entities import AXIS_PAIR, DIAGONAL_PAIR, DIRECTION_ARMS, GridFunction
from app.domain.operators.entities import HessianField

EPS_SING = 1e-12

ArrayLike = Union[float, np.ndarray]


def _pairs_for_width(width: int) -> Tuple[Tuple[int, int], ...]:
    if width == 1:
        return (AXIS_PAIR,)
    if width == 2:
        return (AXIS_PAIR, DIAGONAL_PAIR)
    raise ValueError(f"Largura de estêncil deve ser 1 ou 2: {width!r}")


def directional_differences(u: GridFunction) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Diferenças direcionais nas quatro direções do estêncil (x, y e diagonais).

    Segunda diferença não uniforme (Shortley-Weller) ao longo da direção unitária:
        2/(s₊+s₋) · [(u₊-u₀)/s₊ + (u₋-u₀)/s₋]
    exata em quadráticas; primeira diferença (u₊-u₋)/(s₊+s₋).

    Args:
        u: Função de grade

    Returns:
        Tuple: (segundas diferenças (4, N), primeiras diferenças (4, N),
                coeficientes 2/(s₊s₋) do nó central (4, N))
    """
    grid = u.grid
    values = u.values
    u0 = u.interior
    second = np.empty((4, grid.n_interior))
    first = np.empty((4, grid.n_interior))
    coef = np.empty((4, grid.n_interior))

    for m, (kp, km) in enumerate(DIRECTION_ARMS):
        sp = grid.arm_lengths[kp]
        sm = grid.arm_lengths[km]
        up = values[grid.neighbors[kp]]
        um = values[grid.neighbors[km]]
        second[m] = 2.0 / (sp + sm) * ((up - u0) / sp + (um - u0) / sm)
        first[m] = (up - um) / (sp + sm)
        coef[m] = 2.0 / (sp * sm)
    return second, first, coef


def gradient_central(u: GridFunction) -> np.ndarray:
    """
    Gradiente por diferenças centrais nos eixos.

    Segunda ordem em braços uniformes; nos braços de corte a fórmula
    não uniforme é de primeira ordem.

    Returns:
        np.ndarray: Gradiente, formato (N, 2)
    """
    _, first, _ = directional_differences(u)
    return np.stack([first[0], first[1]], axis=1)


def hessian_central(u: GridFunction) -> HessianField:
    """
    Hessiana central: u_xx e u_yy nos eixos, u_xy pelas diagonais.

    Com e₁ = (1,1)/√2 e e₂ = (-1,1)/√2, Δ_{e₁} - Δ_{e₂} = 2u_xy, o que em braços
    uniformes coincide com a fórmula dos quatro vizinhos diagonais.
    """
    second, first, _ = directional_differences(u)
    return HessianField(
        xx=second[0],
        xy=0.5 * (second[2] - second[3]),
        yy=second[1],
        gradient=np.stack([first[0], first[1]], axis=1),
    )


def _pair_value(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(a, 0.0) * np.maximum(b, 0.0) + np.minimum(a, 0.0) + np.minimum(b, 0.0)


def det_d2_monotone(u: GridFunction, stencil: int = 2) -> np.ndarray:
    """
    Determinante monótono da Hessiana por estêncil largo.

    MA_h[u](p) = min sobre pares ortogonais (v, v⊥) de
        (Δ_vv u)⁺ (Δ_v⊥v⊥ u)⁺ + (Δ_vv u)⁻ + (Δ_v⊥v⊥ u)⁻
    Não decrescente em cada valor vizinho e não crescente em u(p).

    Args:
        u: Função de grade
        stencil: 1 (apenas eixos) ou 2 (eixos e diagonais)

    Returns:
        np.ndarray: MA_h por nó interior
    """
    second, _, _ = directional_differences(u)
    values = [_pair_value(second[m], second[n]) for m, n in _pairs_for_width(stencil)]
    return np.minimum.reduce(values)


def monotone_lipschitz(u: GridFunction, stencil: int = 2) -> np.ndarray:
    """
    Cota por nó da derivada de MA_h em relação a u(p).

    Para o par (m, n): c_m·((Δ_n)⁺ + 1[Δ_m ≤ 0]) + c_n·((Δ_m)⁺ + 1[Δ_n ≤ 0]),
    tomando o máximo entre os pares do estêncil. Em braços uniformes e pares de
    eixos vale (2/h²)·tr(cof D²u), isto é, o traço de det D²u·u^{ij} escalado.
    """
    second, _, coef = directional_differences(u)
    bounds = []
    for m, n in _pairs_for_width(stencil):
        a, b = second[m], second[n]
        bounds.append(
            coef[m] * (np.maximum(b, 0.0) + (a <= 0.0))
            + coef[n] * (np.maximum(a, 0.0) + (b <= 0.0))
        )
    return np.maximum.reduce(bounds)


def eig_2x2(xx: ArrayLike, xy: ArrayLike, yy: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Autovalores de matrizes simétricas 2x2 por traço e discriminante.

    O discriminante é não negativo por construção (hypot), então λ_min <= λ_max.

    Returns:
        Tuple: (λ_min, λ_max)
    """
    xx, xy, yy = (np.asarray(v, dtype=float) for v in (xx, xy, yy))
    half_trace = 0.5 * (xx + yy)
    radius = np.hypot(0.5 * (xx - yy), xy)
    return half_trace - radius, half_trace + radius


def spectral_norm_2x2(xx: ArrayLike, xy: ArrayLike, yy: ArrayLike) -> np.ndarray:
    lam_min, lam_max = eig_2x2(xx, xy, yy)
    return np.maximum(np.abs(lam_min), np.abs(lam_max))


def cofactor_inverse(matrix, eps_sing: float = EPS_SING) -> np.ndarray:
    """
    Inversa de uma matriz simétrica 2x2 pela adjunta.

    Args:
        matrix: Matriz 2x2
        eps_sing: Limiar de singularidade do determinante

    Returns:
        np.ndarray: Inversa 2x2

    Raises:
        SingularHessian: Se det <= eps_sing
    """
    m = np.asarray(matrix, dtype=float)
    a, b, c = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    det = a * c - b * b
    if not det > eps_sing:
        raise SingularHessian(f"Determinante {det!r} abaixo de {eps_sing!r}")
    return np.array([[c, -b], [-b, a]]) / det
