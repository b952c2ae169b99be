"""
Serviço de geometria: construção de domínios e grades com braços de corte
"""
import logging
import math
from typing import Any, Dict, Tuple

import numpy as np

from app.core.exceptions import EmptyGrid, NonConvexDomain
from app.domain.geometry.entities import DIRECTIONS, Domain, Grid
from app.domain.geometry.value_objects.quadratic_form import QuadraticForm

logger = logging.getLogger(__name__)

# Cruzamentos a menos disso de um ponto da rede coincidem com ele
_LATTICE_SNAP = 1e-12


def build_domain(kind: str, params: Dict[str, Any]) -> Domain:
    """
    Constrói um disco ou uma elipse.

    Args:
        kind: "disk" (params: radius, center) ou "ellipse" (params: q, center)
        params: Parâmetros do domínio

    Returns:
        Domain: Domínio com pertinência, projeção e distância com sinal

    Raises:
        NonConvexDomain: Se a forma quadrática não for definida positiva
    """
    center = tuple(float(c) for c in params.get("center", (0.0, 0.0)))
    if kind == "disk":
        form = QuadraticForm.from_radius(float(params.get("radius", 1.0)))
    elif kind == "ellipse":
        if "q" not in params:
            raise NonConvexDomain("Elipse exige a matriz q")
        form = QuadraticForm.create(params["q"])
    else:
        raise ValueError(f"Tipo de domínio desconhecido: {kind}")
    return Domain(kind, center, form)


def boundary_distance(domain: Domain, x) -> float:
    """
    Distância de um ponto interior até ∂Ω.

    Raises:
        OutsideDomain: Se x não estiver no domínio
    """
    return domain.boundary_distance(np.asarray(x, dtype=float))


def build_grid(domain: Domain, h: float, snap_fraction: float = 0.0) -> Grid:
    """
    Enumera os pontos (i·h, j·h) do domínio e liga cada nó interior aos oito vizinhos.

    Braços cujo vizinho da rede não é interior terminam no cruzamento com ∂Ω,
    guardando o comprimento encurtado. Com snap_fraction > 0, pontos da rede
    cujo cruzamento mais próximo fica abaixo dessa fração do braço cheio
    viram âncoras de Dirichlet.

    Args:
        domain: Domínio
        h: Espaçamento da rede
        snap_fraction: Fração mínima de braço tolerada (0 desliga)

    Returns:
        Grid: Grade imutável

    Raises:
        EmptyGrid: Se nenhum ponto da rede for interior
    """
    if not h > 0.0:
        raise ValueError(f"Espaçamento h deve ser positivo: {h!r}")
    if not 0.0 <= snap_fraction < 1.0:
        raise ValueError(f"snap_fraction deve estar em [0, 1): {snap_fraction!r}")

    half_x, half_y = domain.form.half_widths()
    cx, cy = domain.center
    i_range = np.arange(math.floor((cx - half_x) / h), math.ceil((cx + half_x) / h) + 1)
    j_range = np.arange(math.floor((cy - half_y) / h), math.ceil((cy + half_y) / h) + 1)
    ii, jj = np.meshgrid(i_range, j_range, indexing="ij")
    lattice = np.stack([ii.ravel(), jj.ravel()], axis=1)
    inside = domain.contains(lattice * h)
    candidates = lattice[inside]

    inside_keys = {(int(i), int(j)) for i, j in candidates}
    anchored = set()
    if snap_fraction > 0.0:
        for i, j in candidates:
            key = (int(i), int(j))
            if _min_crossing_fraction(domain, key, h, inside_keys) < snap_fraction:
                anchored.add(key)

    interior_keys = sorted(inside_keys - anchored)
    if not interior_keys:
        raise EmptyGrid(f"Nenhum ponto interior da rede com h = {h!r}")

    interior_lookup = {key: n for n, key in enumerate(interior_keys)}
    interior_index = np.array(interior_keys, dtype=int)
    interior_points = interior_index * h
    n_interior = len(interior_keys)

    boundary_lookup: Dict[Tuple[float, float], int] = {}
    boundary_points = []
    neighbors = np.empty((len(DIRECTIONS), n_interior), dtype=int)
    arm_lengths = np.empty((len(DIRECTIONS), n_interior), dtype=float)
    full_lengths = h * np.linalg.norm(DIRECTIONS, axis=1)

    def boundary_node(point: np.ndarray) -> int:
        key = (round(float(point[0]), 12), round(float(point[1]), 12))
        if key not in boundary_lookup:
            boundary_lookup[key] = n_interior + len(boundary_points)
            boundary_points.append(point)
        return boundary_lookup[key]

    for n, (i, j) in enumerate(interior_keys):
        p = np.array([i * h, j * h])
        for k, (di, dj) in enumerate(DIRECTIONS):
            target = (i + int(di), j + int(dj))
            if target in interior_lookup:
                neighbors[k, n] = interior_lookup[target]
                arm_lengths[k, n] = full_lengths[k]
            elif target in anchored:
                neighbors[k, n] = boundary_node(np.array(target, dtype=float) * h)
                arm_lengths[k, n] = full_lengths[k]
            else:
                s = _crossing(domain, p, np.array([di, dj], dtype=float) * h)
                neighbors[k, n] = boundary_node(p + s * np.array([di, dj], dtype=float) * h)
                arm_lengths[k, n] = s * full_lengths[k]

    grid = Grid(
        domain=domain,
        h=h,
        interior_points=interior_points,
        interior_index=interior_index,
        boundary_points=np.array(boundary_points, dtype=float).reshape(-1, 2),
        neighbors=neighbors,
        arm_lengths=arm_lengths,
        snap_fraction=snap_fraction,
    )
    logger.debug(
        "Grade h=%s: %d nós interiores, %d nós de fronteira, %d âncoras",
        h, grid.n_interior, grid.n_boundary, len(anchored),
    )
    return grid


def _crossing(domain: Domain, p: np.ndarray, step: np.ndarray) -> float:
    """
    Fração s ∈ (0, 1] do passo até a fronteira.
    """
    s = domain.ray_exit(p, step)
    if abs(s - 1.0) <= _LATTICE_SNAP or s > 1.0:
        return 1.0
    return s


def _min_crossing_fraction(domain: Domain, key: Tuple[int, int], h: float, inside_keys: set) -> float:
    p = np.array(key, dtype=float) * h
    fraction = 1.0
    for di, dj in DIRECTIONS:
        if (key[0] + int(di), key[1] + int(dj)) in inside_keys:
            continue
        fraction = min(fraction, _crossing(domain, p, np.array([di, dj], dtype=float) * h))
    return fraction
