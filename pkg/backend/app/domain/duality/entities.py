"""
Entidades da dualidade de Legendre.
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np


class DualGrid:
    """
    Rede retangular y = (i·s, j·s) cobrindo a imagem do gradiente discreto.

    Os nós são indexados em ordem lexicográfica: m = a·ny + b, com a o índice
    em y₁ e b o índice em y₂.
    """

    def __init__(self, spacing: float, i_range: Tuple[int, int], j_range: Tuple[int, int], forced: bool = False):
        if not spacing > 0.0:
            raise ValueError(f"Espaçamento dual deve ser positivo: {spacing!r}")
        if i_range[1] < i_range[0] or j_range[1] < j_range[0]:
            raise ValueError("Faixa de índices dual vazia")
        self.spacing = float(spacing)
        self.i_range = (int(i_range[0]), int(i_range[1]))
        self.j_range = (int(j_range[0]), int(j_range[1]))
        self.forced = forced
        self.y1 = np.arange(self.i_range[0], self.i_range[1] + 1) * self.spacing
        self.y2 = np.arange(self.j_range[0], self.j_range[1] + 1) * self.spacing

    @property
    def shape(self) -> Tuple[int, int]:
        return int(self.y1.size), int(self.y2.size)

    @property
    def n_nodes(self) -> int:
        nx, ny = self.shape
        return nx * ny

    @property
    def points(self) -> np.ndarray:
        yy1, yy2 = np.meshgrid(self.y1, self.y2, indexing="ij")
        return np.stack([yy1.ravel(), yy2.ravel()], axis=1)

    def box(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return (float(self.y1[0]), float(self.y2[0])), (float(self.y1[-1]), float(self.y2[-1]))

    def describe(self) -> Dict[str, Any]:
        lo, hi = self.box()
        return {"spacing": self.spacing, "shape": list(self.shape), "lower": list(lo), "upper": list(hi)}


class DualField:
    """
    Transformada U(y) = max_x (y·x - u(x)) na grade dual, com o mapa de argmax.

    O argmax guarda o índice do nó primal (interiores primeiro, depois fronteira);
    máximos atingidos na fronteira primal são sinalizados.
    """

    def __init__(self, grid: DualGrid, values: np.ndarray, argmax: np.ndarray, t: float, n_primal_interior: int):
        self.grid = grid
        self.values = np.asarray(values, dtype=float)
        self.argmax = np.asarray(argmax, dtype=int)
        self.t = float(t)
        self.n_primal_interior = int(n_primal_interior)
        if self.values.shape != (grid.n_nodes,) or self.argmax.shape != (grid.n_nodes,):
            raise ValueError("Número de valores duais difere do número de nós duais")

    @property
    def boundary_argmax(self) -> np.ndarray:
        """
        Nós duais cujo máximo é atingido num nó de fronteira primal.
        """
        return self.argmax >= self.n_primal_interior

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def _stencil_any(self, mask: np.ndarray) -> np.ndarray:
        """
        Para cada nó com estêncil 3x3 completo, se algum vizinho (ou ele mesmo) está na máscara.
        """
        grid2 = mask.reshape(self.grid.shape)
        nx, ny = self.grid.shape
        out = np.zeros(self.grid.shape, dtype=bool)
        if nx < 3 or ny < 3:
            return out.ravel()
        core = np.zeros((nx - 2, ny - 2), dtype=bool)
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                core |= grid2[1 + da:nx - 1 + da, 1 + db:ny - 1 + db]
        out[1:-1, 1:-1] = core
        return out.ravel()

    def full_stencil(self) -> np.ndarray:
        """
        Nós afastados da borda da caixa dual.
        """
        nx, ny = self.grid.shape
        mask = np.zeros(self.grid.shape, dtype=bool)
        mask[1:-1, 1:-1] = True
        return mask.ravel()

    def stencil_classes(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        (interior, anel): interior quando os nove argmax do estêncil são nós
        interiores primais; anel quando o centro é interior mas o estêncil toca
        um argmax na fronteira primal.
        """
        full = self.full_stencil()
        touches = self._stencil_any(self.boundary_argmax)
        centre_inside = ~self.boundary_argmax
        interior = full & centre_inside & ~touches
        ring = full & centre_inside & touches
        return interior, ring

    def hessian(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Hessiana central (U₁₁, U₁₂, U₂₂) por nó; NaN na borda da caixa.
        """
        u = self.as_array()
        s2 = self.grid.spacing ** 2
        xx = np.full(u.shape, np.nan)
        xy = np.full(u.shape, np.nan)
        yy = np.full(u.shape, np.nan)
        xx[1:-1, 1:-1] = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / s2
        yy[1:-1, 1:-1] = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / s2
        xy[1:-1, 1:-1] = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * s2)
        return xx.ravel(), xy.ravel(), yy.ravel()

    def gradient(self) -> np.ndarray:
        """
        Gradiente central DU, formato (M, 2); NaN na borda da caixa.
        """
        u = self.as_array()
        s = self.grid.spacing
        g1 = np.full(u.shape, np.nan)
        g2 = np.full(u.shape, np.nan)
        g1[1:-1, 1:-1] = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * s)
        g2[1:-1, 1:-1] = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * s)
        return np.stack([g1.ravel(), g2.ravel()], axis=1)


@dataclass
class DualResidual:
    """
    Resíduo r(y) = -U_t - 1/det D²U + ψ(DU, t) e suas normas nos nós válidos.
    """
    residual: np.ndarray
    valid: np.ndarray
    field: DualField
    t: float
    snapshot_dt: float
    max_abs: float
    mean_abs: float
    n_valid: int
    n_singular: int
    n_excluded: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "snapshot_dt": self.snapshot_dt,
            "max_abs": self.max_abs,
            "mean_abs": self.mean_abs,
            "n_valid": self.n_valid,
            "n_singular": self.n_singular,
            "n_excluded": self.n_excluded,
            "dual_grid": self.field.grid.describe(),
        }
