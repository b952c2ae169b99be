"""
Transformada de Legendre-Fenchel discreta, biconjugada e resíduo da equação dual.

A conjugação por força bruta define a semântica; a transformada separável
(máximo interno por coluna x₁ = const, depois máximo externo) reproduz os mesmos
valores bit a bit porque ambas avaliam y₁x₁ + (y₂x₂ - u) na mesma ordem e o
arredondamento da soma é monótono. Empates resolvem-se pelo menor índice primal.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import DegenerateDual, DualGridTooSmall
from app.core.parallel import parallel_map
from app.domain.duality.entities import DualField, DualGrid, DualResidual
from app.domain.geometry.entities import GridFunction
from app.domain.problem.entities import ProblemSpec
from app.domain.solution.entities import SolutionTrace
from app.services.ma_operators import EPS_SING, det_d2_monotone, gradient_central, spectral_norm_2x2

logger = logging.getLogger(__name__)

DEFAULT_PADDING = 0.1
# Linhas da matriz de escores avaliadas por bloco na força bruta
_CHUNK = 512


def build_dual_grid(
    fields: Sequence[GridFunction],
    spacing: Optional[float] = None,
    padding: float = DEFAULT_PADDING,
    box: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
) -> DualGrid:
    """
    Caixa dual cobrindo a imagem dos gradientes discretos dos campos.

    Args:
        fields: Campos primais (mesma grade)
        spacing: Espaçamento dual (padrão 2h)
        padding: Folga relativa da caixa automática
        box: Caixa imposta ((y1_min, y2_min), (y1_max, y2_max))

    Returns:
        DualGrid: Grade dual com nós em múltiplos inteiros do espaçamento

    Raises:
        DualGridTooSmall: Se a caixa imposta não cobrir a imagem do gradiente
    """
    if not fields:
        raise ValueError("Pelo menos um campo é necessário")
    spacing = 2.0 * fields[0].grid.h if spacing is None else float(spacing)
    gradients = np.vstack([gradient_central(f) for f in fields])
    lo = gradients.min(axis=0)
    hi = gradients.max(axis=0)

    if box is not None:
        box_lo = np.asarray(box[0], dtype=float)
        box_hi = np.asarray(box[1], dtype=float)
        if np.any(lo < box_lo) or np.any(hi > box_hi):
            raise DualGridTooSmall(
                f"Imagem do gradiente [{lo.tolist()}, {hi.tolist()}] fora da caixa dual "
                f"[{box_lo.tolist()}, {box_hi.tolist()}]"
            )
        lo, hi = box_lo, box_hi
        forced = True
    else:
        pad = padding * np.maximum(hi - lo, spacing)
        lo, hi = lo - pad, hi + pad
        forced = False

    i_range = (math.floor(lo[0] / spacing), math.ceil(hi[0] / spacing))
    j_range = (math.floor(lo[1] / spacing), math.ceil(hi[1] / spacing))
    return DualGrid(spacing, i_range, j_range, forced=forced)


def _brute_block(query: np.ndarray, points: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scores = query[:, 0:1] * points[None, :, 0] + (query[:, 1:2] * points[None, :, 1] - values[None, :])
    index = np.argmax(scores, axis=1)
    return scores[np.arange(query.shape[0]), index], index


def conjugate_brute_force(query: np.ndarray, points: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    max_k (q·p_k - values_k) por varredura completa, argmax no menor índice.

    Args:
        query: Pontos de avaliação (M, 2)
        points: Pontos de suporte (N, 2)
        values: Valores nos pontos de suporte (N,)

    Returns:
        Tuple: (máximos (M,), argmax (M,))
    """
    query = np.asarray(query, dtype=float)
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    blocks = [query[i:i + _CHUNK] for i in range(0, query.shape[0], _CHUNK)]
    results = parallel_map(lambda block: _brute_block(block, points, values), blocks)
    if not results:
        return np.empty(0), np.empty(0, dtype=int)
    return np.concatenate([r[0] for r in results]), np.concatenate([r[1] for r in results])


def conjugate_separable(grid: DualGrid, points: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mesma conjugação numa grade dual tensorial, eixo por eixo.

    Máximo interno por coluna (pontos com o mesmo x₁) para cada y₂, depois
    máximo externo sobre colunas para cada y₁. Custo O(N·ny + nx·C·ny).
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    n = points.shape[0]
    columns, column_of = np.unique(points[:, 0], return_inverse=True)
    n_cols = columns.size
    nx, ny = grid.shape

    inner_scores = grid.y2[None, :] * points[:, 1:2] - values[:, None]
    inner = np.full((n_cols, ny), -np.inf)
    np.maximum.at(inner, column_of, inner_scores)
    ties = inner_scores == inner[column_of]
    inner_index = np.full((n_cols, ny), n, dtype=int)
    np.minimum.at(inner_index, column_of, np.where(ties, np.arange(n)[:, None], n))

    def outer(a: int) -> Tuple[np.ndarray, np.ndarray]:
        scores = grid.y1[a] * columns[:, None] + inner
        best = scores.max(axis=0)
        index = np.where(scores == best[None, :], inner_index, n).min(axis=0)
        return best, index

    rows = parallel_map(outer, range(nx))
    values_out = np.concatenate([r[0] for r in rows])
    index_out = np.concatenate([r[1] for r in rows])
    return values_out, index_out


def legendre_transform(u: GridFunction, dual: DualGrid, t: float = 0.0, method: str = "separable") -> DualField:
    """
    U(y) = max sobre todos os nós primais x (interiores e de fronteira) de y·x - u(x).

    Args:
        u: Campo primal finito
        dual: Grade dual
        t: Rótulo de tempo
        method: "separable" (padrão) ou "brute" (oráculo)

    Returns:
        DualField: Valores e argmax lexicográfico
    """
    points = u.grid.points
    values = u.values
    if method == "separable":
        conj, index = conjugate_separable(dual, points, values)
    elif method == "brute":
        conj, index = conjugate_brute_force(dual.points, points, values)
    else:
        raise ValueError(f"Método de conjugação desconhecido: {method!r}")
    return DualField(dual, conj, index, t, u.grid.n_interior)


def biconjugate(u: GridFunction, dual: DualGrid) -> GridFunction:
    """
    u**(x) = max sobre nós duais y de x·y - U(y); u** ≤ u, com igualdade onde u
    coincide com seu envelope convexo discreto e a grade dual contém um subgradiente.
    """
    field = legendre_transform(u, dual)
    values, _ = conjugate_brute_force(u.grid.points, dual.points, field.values)
    n = u.grid.n_interior
    return GridFunction(u.grid, values[:n], values[n:])


def check_convex(u: GridFunction, t: float) -> None:
    min_ma = float(np.min(det_d2_monotone(u)))
    if not min_ma > 0.0:
        raise DegenerateDual(f"Snapshot em t={t!r} não é discretamente convexo (min MA_h = {min_ma!r})")


def dual_residual(
    trace: SolutionTrace,
    spec: ProblemSpec,
    index: int,
    spacing: Optional[float] = None,
    eps_sing: float = EPS_SING,
) -> DualResidual:
    """
    Resíduo da equação dual -U_t - 1/det D²U + ψ(DU, t) no snapshot index.

    U_t é a diferença regressiva entre os snapshots index-1 e index, ambos
    transformados na mesma grade dual. Nós na borda da caixa, com estêncil
    tocando argmax na fronteira primal, ou com centro fora da imagem do
    gradiente no instante anterior são excluídos e contados; nós com
    det D²U ≤ eps_sing também.

    Raises:
        DegenerateDual: Se algum dos snapshots não for discretamente convexo
    """
    if not 1 <= index < len(trace.snapshots):
        raise ValueError(f"Índice de snapshot inválido para diferença regressiva: {index}")
    t0, t1 = trace.times[index - 1], trace.times[index]
    u0, u1 = trace.snapshots[index - 1], trace.snapshots[index]
    check_convex(u0, t0)
    check_convex(u1, t1)

    dual = build_dual_grid([u0, u1], spacing=spacing)
    previous = legendre_transform(u0, dual, t0)
    current = legendre_transform(u1, dual, t1)

    interior, _ = current.stencil_classes()
    base = interior & ~previous.boundary_argmax
    xx, xy, yy = current.hessian()
    det = xx * yy - xy * xy
    singular = base & ~(det > eps_sing)
    valid = base & ~singular

    snapshot_dt = t1 - t0
    u_t = (current.values - previous.values) / snapshot_dt
    grad = current.gradient()
    residual = np.full(dual.n_nodes, np.nan)
    if np.any(valid):
        forcing = spec.psi_at(grad[valid], t1)
        residual[valid] = -u_t[valid] - 1.0 / det[valid] + forcing

    n_valid = int(np.count_nonzero(valid))
    abs_r = np.abs(residual[valid])
    n_excluded = int(dual.n_nodes - np.count_nonzero(base))
    if n_excluded:
        logger.debug("Resíduo dual em t=%s: %d nós excluídos", t1, n_excluded)
    return DualResidual(
        residual=residual,
        valid=valid,
        field=current,
        t=t1,
        snapshot_dt=snapshot_dt,
        max_abs=float(abs_r.max()) if n_valid else math.nan,
        mean_abs=float(abs_r.mean()) if n_valid else math.nan,
        n_valid=n_valid,
        n_singular=int(np.count_nonzero(singular)),
        n_excluded=n_excluded,
    )


def dual_hessian_sup(field: DualField, initial: Optional[DualField] = None) -> Tuple[float, float]:
    """
    (sup interior, sup no anel) de ‖D²U‖ espectral.

    O anel reúne os nós cujo estêncil toca a imagem da fronteira primal e,
    se fornecida, a camada dual de t = 0 inteira (nós com estêncil completo).

    Returns:
        Tuple: (sup interior, sup do anel); NaN quando o conjunto é vazio
    """
    interior, ring = field.stencil_classes()
    norms = spectral_norm_2x2(*field.hessian())
    ring_values = [norms[ring]]
    if initial is not None:
        first_interior, first_ring = initial.stencil_classes()
        ring_values.append(spectral_norm_2x2(*initial.hessian())[first_interior | first_ring])
    ring_all = np.concatenate(ring_values)
    interior_sup = float(np.max(norms[interior])) if np.any(interior) else math.nan
    ring_sup = float(np.max(ring_all)) if ring_all.size else math.nan
    return interior_sup, ring_sup
