"""
Entidades do domínio de geometria: região, grade e funções de grade.
"""
from typing import Callable, Optional, Tuple

import numpy as np

from app.core.exceptions import OutsideDomain
from app.domain.geometry.value_objects.quadratic_form import QuadraticForm

# Deslocamentos unitários da rede, em pares opostos: eixos x, y e as duas diagonais
DIRECTIONS = np.array([
    (1, 0), (-1, 0),
    (0, 1), (0, -1),
    (1, 1), (-1, -1),
    (-1, 1), (1, -1),
], dtype=int)

# (braço +, braço -) de cada direção
DIRECTION_ARMS = ((0, 1), (2, 3), (4, 5), (6, 7))

# Pares ortogonais de direções usados pelo operador monótono
AXIS_PAIR = (0, 1)
DIAGONAL_PAIR = (2, 3)

_NEWTON_TOL = 1e-12


class Domain:
    """
    Região uniformemente convexa {x : (x-c)ᵀQ(x-c) < 1} (disco ou elipse).

    A fronteira é excluída da região; as consultas de geometria aceitam
    pontos isolados de formato (2,) ou arrays (..., 2).
    """

    def __init__(self, kind: str, center: Tuple[float, float], form: QuadraticForm):
        if kind not in ("disk", "ellipse"):
            raise ValueError(f"Tipo de domínio desconhecido: {kind}")
        self.kind = kind
        self.center = np.asarray(center, dtype=float)
        self.form = form

    @property
    def radius(self) -> float:
        """
        Raio do disco (apenas para kind = disk).
        """
        return float(1.0 / np.sqrt(self.form.q11))

    def contains(self, x: np.ndarray) -> np.ndarray:
        """
        Pertinência estrita: (x-c)ᵀQ(x-c) < 1.
        """
        return self.form.evaluate(np.asarray(x, dtype=float) - self.center) < 1.0

    def boundary_point(self, theta: np.ndarray) -> np.ndarray:
        """
        Parametrização da fronteira pelo ângulo nos eixos principais.

        Args:
            theta: Ângulos (qualquer formato)

        Returns:
            np.ndarray: Pontos de formato theta.shape + (2,)
        """
        theta = np.asarray(theta, dtype=float)
        lam, vec = np.linalg.eigh(self.form.matrix)
        local = np.stack([np.cos(theta) / np.sqrt(lam[0]), np.sin(theta) / np.sqrt(lam[1])], axis=-1)
        return self.center + local @ vec.T

    def ray_exit(self, p: np.ndarray, d: np.ndarray) -> float:
        """
        Menor s > 0 com p + s·d sobre a fronteira, para p no interior.

        Args:
            p: Ponto interior
            d: Deslocamento (não nulo)

        Returns:
            float: Parâmetro s do cruzamento
        """
        rel = np.asarray(p, dtype=float) - self.center
        d = np.asarray(d, dtype=float)
        q = self.form.matrix
        a = float(d @ q @ d)
        b = 2.0 * float(d @ q @ rel)
        c = float(rel @ q @ rel) - 1.0
        root = np.sqrt(max(b * b - 4.0 * a * c, 0.0))
        # forma estável das raízes (c < 0 para p interior)
        if b >= 0.0:
            return -2.0 * c / (b + root)
        return (-b + root) / (2.0 * a)

    def project(self, x: np.ndarray) -> np.ndarray:
        """
        Ponto da fronteira mais próximo de x.

        Exato para o disco; para elipses usa Newton salvaguardado por bissecção
        no multiplicador de Lagrange (tolerância 1e-12).
        """
        x = np.asarray(x, dtype=float)
        if x.ndim > 1:
            flat = x.reshape(-1, 2)
            return np.array([self.project(p) for p in flat]).reshape(x.shape)

        rel = x - self.center
        if self.kind == "disk":
            norm = np.hypot(rel[0], rel[1])
            if norm == 0.0:
                return self.center + np.array([self.radius, 0.0])
            return self.center + self.radius * rel / norm

        lam, vec = np.linalg.eigh(self.form.matrix)
        e0, e1 = 1.0 / np.sqrt(lam[0]), 1.0 / np.sqrt(lam[1])
        local = vec.T @ rel
        signs = np.where(local < 0.0, -1.0, 1.0)
        z0, z1 = _project_canonical_ellipse(e0, e1, abs(local[0]), abs(local[1]))
        return self.center + vec @ (signs * np.array([z0, z1]))

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        """
        Distância até a fronteira, positiva dentro e negativa fora.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "disk":
            rel = x - self.center
            return self.radius - np.hypot(rel[..., 0], rel[..., 1])
        dist = np.linalg.norm(self.project(x) - x, axis=-1)
        return np.where(self.contains(x), dist, -dist)

    def boundary_distance(self, x: np.ndarray) -> float:
        """
        Distância d_∂Ω de um ponto interior.

        Raises:
            OutsideDomain: Se x não estiver no domínio aberto
        """
        x = np.asarray(x, dtype=float)
        if not bool(self.contains(x)):
            raise OutsideDomain(f"Ponto fora do domínio: {x.tolist()}")
        return float(self.signed_distance(x))

    def describe(self) -> dict:
        """
        Resumo geométrico para diagnósticos (inclui a excentricidade).
        """
        return {
            "kind": self.kind,
            "center": self.center.tolist(),
            "q": self.form.matrix.tolist(),
            "eccentricity": self.form.eccentricity(),
        }


def _project_canonical_ellipse(e0: float, e1: float, y0: float, y1: float) -> Tuple[float, float]:
    """
    Projeção sobre x0²/e0² + x1²/e1² = 1 para e0 >= e1 > 0 e y no primeiro quadrante.
    """
    if y1 > 0.0:
        if y0 > 0.0:
            z0, z1 = y0 / e0, y1 / e1
            g = z0 * z0 + z1 * z1 - 1.0
            if g == 0.0:
                return y0, y1
            r0 = (e0 / e1) ** 2
            s = _lagrange_root(r0, z0, z1, g)
            return r0 * y0 / (s + r0), y1 / (s + 1.0)
        return 0.0, e1

    numer0 = e0 * y0
    denom0 = e0 * e0 - e1 * e1
    if numer0 < denom0:
        xde0 = numer0 / denom0
        return e0 * xde0, e1 * np.sqrt(max(0.0, 1.0 - xde0 * xde0))
    return e0, 0.0


def _lagrange_root(r0: float, z0: float, z1: float, g: float, max_iter: int = 200) -> float:
    """
    Raiz de F(s) = (r0·z0/(s+r0))² + (z1/(s+1))² - 1, decrescente no intervalo de busca.
    """
    n0 = r0 * z0
    lo = z1 - 1.0
    hi = 0.0 if g < 0.0 else np.hypot(n0, z1) - 1.0
    s = 0.5 * (lo + hi)

    for _ in range(max_iter):
        a = n0 / (s + r0)
        b = z1 / (s + 1.0)
        value = a * a + b * b - 1.0
        if value > 0.0:
            lo = s
        elif value < 0.0:
            hi = s
        else:
            return s

        slope = -2.0 * (a * a / (s + r0) + b * b / (s + 1.0))
        candidate = s - value / slope if slope != 0.0 else 0.5 * (lo + hi)
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - s) <= _NEWTON_TOL * (1.0 + abs(s)) * 1e-3:
            return candidate
        s = candidate
    return s


class Grid:
    """
    Rede cartesiana (i·h, j·h) recortada pelo domínio.

    Nós interiores carregam oito braços (eixos e diagonais). Braços que
    cruzam a fronteira terminam em nós de fronteira e guardam o comprimento
    encurtado verdadeiro. Os valores de uma função de grade são indexados
    como [interiores..., fronteira...].
    """

    def __init__(
        self,
        domain: Domain,
        h: float,
        interior_points: np.ndarray,
        interior_index: np.ndarray,
        boundary_points: np.ndarray,
        neighbors: np.ndarray,
        arm_lengths: np.ndarray,
        snap_fraction: float = 0.0,
    ):
        self.domain = domain
        self.h = float(h)
        self.interior_points = interior_points
        self.interior_index = interior_index
        self.boundary_points = boundary_points
        self.neighbors = neighbors
        self.arm_lengths = arm_lengths
        self.snap_fraction = snap_fraction

        for array in (interior_points, interior_index, boundary_points, neighbors, arm_lengths):
            array.setflags(write=False)

        full = self.full_arm_lengths()[:, None]
        self.uniform_arms = np.isclose(arm_lengths, full, rtol=0.0, atol=1e-14 * self.h)
        self.uniform_arms.setflags(write=False)

    @property
    def n_interior(self) -> int:
        return int(self.interior_points.shape[0])

    @property
    def n_boundary(self) -> int:
        return int(self.boundary_points.shape[0])

    @property
    def n_nodes(self) -> int:
        return self.n_interior + self.n_boundary

    @property
    def points(self) -> np.ndarray:
        """
        Coordenadas de todos os nós, interiores primeiro.
        """
        return np.vstack([self.interior_points, self.boundary_points])

    def full_arm_lengths(self) -> np.ndarray:
        """
        Comprimento de cada braço sem corte: h nos eixos e h·√2 nas diagonais.
        """
        return self.h * np.linalg.norm(DIRECTIONS, axis=1)

    def unit_directions(self) -> np.ndarray:
        return DIRECTIONS / np.linalg.norm(DIRECTIONS, axis=1)[:, None]

    def arm_endpoints(self) -> np.ndarray:
        """
        Extremos dos braços, formato (8, n_interior, 2).
        """
        return self.points[self.neighbors]

    def fully_uniform_nodes(self) -> np.ndarray:
        """
        Máscara dos nós interiores cujos oito braços têm comprimento cheio.
        """
        return np.all(self.uniform_arms, axis=0)

    def boundary_adjacent_nodes(self) -> np.ndarray:
        """
        Máscara dos nós interiores com algum braço terminando na fronteira.
        """
        return np.any(self.neighbors >= self.n_interior, axis=0)

    def lattice_key(self, point: np.ndarray) -> Tuple[int, int]:
        return int(round(point[0] / self.h)), int(round(point[1] / self.h))


class GridFunction:
    """
    Campo escalar sobre uma grade: um valor por nó interior e por nó de fronteira.
    """

    def __init__(self, grid: Grid, interior: np.ndarray, boundary: np.ndarray):
        interior = np.array(interior, dtype=float)
        boundary = np.array(boundary, dtype=float)
        if interior.shape != (grid.n_interior,) or boundary.shape != (grid.n_boundary,):
            raise ValueError(
                "Número de valores difere do número de nós: "
                f"{interior.shape}/{boundary.shape} para {grid.n_interior}/{grid.n_boundary}"
            )
        if not (np.all(np.isfinite(interior)) and np.all(np.isfinite(boundary))):
            raise ValueError("Função de grade com valores não finitos")
        self.grid = grid
        self.interior = interior
        self.boundary = boundary

    @staticmethod
    def from_function(grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> 'GridFunction':
        """
        Amostra func(points) nos nós interiores e de fronteira.

        Args:
            grid: Grade alvo
            func: Função vetorizada de um array (N, 2)
        """
        interior = np.broadcast_to(func(grid.interior_points), (grid.n_interior,))
        boundary = np.broadcast_to(func(grid.boundary_points), (grid.n_boundary,))
        return GridFunction(grid, interior, boundary)

    @property
    def values(self) -> np.ndarray:
        """
        Valores concatenados [interiores..., fronteira...].
        """
        return np.concatenate([self.interior, self.boundary])

    def copy(self) -> 'GridFunction':
        return GridFunction(self.grid, self.interior.copy(), self.boundary.copy())

    def with_interior(self, interior: np.ndarray, boundary: Optional[np.ndarray] = None) -> 'GridFunction':
        return GridFunction(self.grid, interior, self.boundary if boundary is None else boundary)
