"""
Verificações das estimativas a priori sobre traços de solução.

Constantes das estimativas são medidas e relatadas; só os lados explicitamente
quantificados viram asserções (com folga κ·h).
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from app.core.exceptions import IncompatibleTraces
from app.domain.geometry.entities import GridFunction
from app.domain.problem.entities import EquationKind, ProblemSpec
from app.domain.solution.entities import SolutionTrace
from app.schemas.estimate_report import (
    C0BoundsResult,
    ComparisonResult,
    DualMaxPrincipleResult,
    DualResidualResult,
    EigenBoundsResult,
    GradientBoundResult,
    HolderResult,
    UtBoundsResult,
)
from app.services.legendre_service import (
    build_dual_grid,
    check_convex,
    dual_hessian_sup,
    dual_residual,
    legendre_transform,
)
from app.services.ma_operators import det_d2_monotone, eig_2x2, gradient_central, hessian_central
from app.services.problem_service import validate_conditions

logger = logging.getLogger(__name__)

KAPPA = 10.0
COMPARISON_TOLERANCE = 1e-12
HOLDER_PAIRS = 100_000
DUAL_RESIDUAL_FACTOR = 5.0
# Abaixo disso a parte temporal da seminorma de Hölder é pouco amostrada
MIN_HOLDER_TIMES = 3


def _dt_range(trace: SolutionTrace) -> Tuple[Optional[float], Optional[float]]:
    dts = trace.step_sizes()
    if dts.size == 0:
        return None, None
    return float(dts.min()), float(dts.max())


def _conditions_hold(trace: SolutionTrace) -> bool:
    density = max(4, int(math.ceil(4.0 / trace.grid.h)))
    return validate_conditions(trace.spec, density).passed


def check_comparison(
    trace_w: SolutionTrace,
    trace_v: SolutionTrace,
    tolerance: float = COMPARISON_TOLERANCE,
) -> ComparisonResult:
    """
    Conta (nó, passo) com wⁿ > vⁿ + tolerância em execuções em passo comum.

    Antes confere as hipóteses: mesma grade e mesma sequência de instantes,
    ψ_w ≥ ψ_v nos nós interiores em cada instante de passo e w ≤ v em ∂_pQ_T.

    Raises:
        IncompatibleTraces: Se grades, instantes ou ordenação dos dados não conferirem
    """
    grid = trace_w.grid
    if trace_v.grid is not grid and not np.array_equal(trace_v.grid.points, grid.points):
        raise IncompatibleTraces("Traços em grades diferentes")
    if trace_w.times != trace_v.times:
        raise IncompatibleTraces("Traços sem a mesma sequência de instantes")
    if trace_w.step_sizes().tolist() != trace_v.step_sizes().tolist():
        raise IncompatibleTraces("Traços sem a mesma sequência de passos")

    step_times = trace_w.column("t")
    for t in step_times:
        psi_w = trace_w.spec.psi_at(grid.interior_points, t)
        psi_v = trace_v.spec.psi_at(grid.interior_points, t)
        if np.any(psi_w < psi_v):
            raise IncompatibleTraces(f"ψ_w < ψ_v em algum nó no instante {t!r}")

    first_w, first_v = trace_w.snapshots[0], trace_v.snapshots[0]
    if np.any(first_w.values > first_v.values):
        raise IncompatibleTraces("w > v no instante inicial")
    for snap_w, snap_v in zip(trace_w.snapshots, trace_v.snapshots):
        if np.any(snap_w.boundary > snap_v.boundary):
            raise IncompatibleTraces("w > v na fronteira lateral")

    violations = 0
    worst = -math.inf
    for snap_w, snap_v in zip(trace_w.snapshots, trace_v.snapshots):
        gap = snap_w.values - snap_v.values
        violations += int(np.count_nonzero(gap > tolerance))
        worst = max(worst, float(gap.max()))

    dt_min, dt_max = _dt_range(trace_w)
    if violations:
        logger.warning("Princípio de comparação violado em %d pares (pior diferença %g)", violations, worst)
    return ComparisonResult(
        passed=violations == 0,
        tolerance=tolerance,
        h=grid.h,
        dt_min=dt_min,
        dt_max=dt_max,
        violations=violations,
        worst_gap=worst,
        n_steps=trace_w.n_steps,
    )


def aggregate_comparisons(results: Sequence[ComparisonResult]) -> ComparisonResult:
    """
    Consolida as verificações de vários pares ordenados em um único resultado.

    Raises:
        ValueError: Se a lista estiver vazia
    """
    if not results:
        raise ValueError("Nenhum par de comparação para consolidar")
    dt_mins = [r.dt_min for r in results if r.dt_min is not None]
    dt_maxs = [r.dt_max for r in results if r.dt_max is not None]
    return ComparisonResult(
        passed=all(r.passed for r in results),
        tolerance=results[0].tolerance,
        h=results[0].h,
        dt_min=min(dt_mins) if dt_mins else None,
        dt_max=max(dt_maxs) if dt_maxs else None,
        violations=sum(r.violations for r in results),
        worst_gap=max(r.worst_gap for r in results),
        n_steps=max(r.n_steps for r in results),
        n_pairs=sum(r.n_pairs for r in results),
        note=results[0].note,
    )


def check_ut_bounds(trace: SolutionTrace, spec: ProblemSpec, kappa: float = KAPPA) -> UtBoundsResult:
    """
    inf(u_t + ψ) ≥ min{c₀, min MA_h[φ(·,0)]} - κ·h sobre a execução.

    O máximo medido é apenas relatado. Para o fluxo de Gauss, ou quando
    (P1)-(P3) falham, a asserção não se aplica.
    """
    measured_min = float(np.min(trace.column("min_ut_psi")))
    measured_max = float(np.max(trace.column("max_ut_psi")))
    dt_min, dt_max = _dt_range(trace)
    tolerance = kappa * trace.grid.h
    common = dict(tolerance=tolerance, h=trace.grid.h, dt_min=dt_min, dt_max=dt_max,
                  measured_min=measured_min, measured_max=measured_max, kappa=kappa)

    if spec.kind == EquationKind.GCF:
        return UtBoundsResult(passed=None, note="limites de u_t do fluxo relatados", **common)
    if not _conditions_hold(trace):
        return UtBoundsResult(passed=None, note="hipóteses (P1)-(P3) falham; verificação não aplicável", **common)

    lower = min(spec.c0, float(np.min(det_d2_monotone(trace.snapshots[0], trace.stencil))))
    margin = measured_min - lower
    return UtBoundsResult(passed=margin >= -tolerance, theoretical_lower=lower, margin=margin, **common)


def _interior_eigenvalues(u: GridFunction) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    hessian = hessian_central(u)
    lam_min, lam_max = eig_2x2(hessian.xx, hessian.xy, hessian.yy)
    return lam_min, lam_max, u.grid.boundary_adjacent_nodes()


def check_eigen_bounds(
    trace: SolutionTrace,
    spec: ProblemSpec,
    kappa: float = KAPPA,
    dual_spacing: Optional[float] = None,
) -> EigenBoundsResult:
    """
    Estrutura do argumento dual: min λ(D²u) ≥ (sup no anel de ‖D²U‖)⁻¹ - κ·h.

    Cada snapshot é comparado com o anel da sua transformada unido à camada
    dual de t = 0.

    Raises:
        DegenerateDual: Se algum snapshot não for discretamente convexo
    """
    for t, u in zip(trace.times, trace.snapshots):
        check_convex(u, t)

    dual = build_dual_grid(trace.snapshots, spacing=dual_spacing)
    initial = legendre_transform(trace.snapshots[0], dual, trace.times[0])
    interior_min, interior_max = math.inf, -math.inf
    boundary_min, boundary_max = math.inf, -math.inf
    worst_margin = math.inf
    dual_bound = math.inf

    for t, u in zip(trace.times, trace.snapshots):
        lam_min, lam_max, adjacent = _interior_eigenvalues(u)
        interior_min = min(interior_min, float(lam_min.min()))
        interior_max = max(interior_max, float(lam_max.max()))
        if np.any(adjacent):
            boundary_min = min(boundary_min, float(lam_min[adjacent].min()))
            boundary_max = max(boundary_max, float(lam_max[adjacent].max()))

        field = legendre_transform(u, dual, t)
        _, ring_sup = dual_hessian_sup(field, initial)
        bound = 1.0 / ring_sup
        dual_bound = min(dual_bound, bound)
        worst_margin = min(worst_margin, float(lam_min.min()) - bound)

    tolerance = kappa * trace.grid.h
    dt_min, dt_max = _dt_range(trace)
    return EigenBoundsResult(
        passed=worst_margin >= -tolerance,
        tolerance=tolerance,
        h=trace.grid.h,
        dt_min=dt_min,
        dt_max=dt_max,
        interior_min_lambda=interior_min,
        interior_max_lambda=interior_max,
        boundary_min_lambda=boundary_min,
        boundary_max_lambda=boundary_max,
        dual_lower_bound=dual_bound,
        margin=worst_margin,
        kappa=kappa,
    )


def check_dual_max_principle(
    trace: SolutionTrace,
    indices: Sequence[int],
    kappa: float = KAPPA,
    dual_spacing: Optional[float] = None,
) -> DualMaxPrincipleResult:
    """
    sup interior ‖D²U‖ ≤ sup no anel + κ·h nos snapshots pedidos.
    """
    selected = [0, *indices]
    for i in selected:
        check_convex(trace.snapshots[i], trace.times[i])
    snapshots = [trace.snapshots[i] for i in selected]
    dual = build_dual_grid(snapshots, spacing=dual_spacing)
    initial = legendre_transform(trace.snapshots[0], dual, trace.times[0])
    interior_sup, ring_sup = -math.inf, -math.inf
    for i in indices:
        field = legendre_transform(trace.snapshots[i], dual, trace.times[i])
        inner, ring = dual_hessian_sup(field, initial)
        interior_sup = max(interior_sup, inner)
        ring_sup = max(ring_sup, ring)

    tolerance = kappa * trace.grid.h
    margin = ring_sup - interior_sup
    dt_min, dt_max = _dt_range(trace)
    return DualMaxPrincipleResult(
        passed=margin >= -tolerance,
        tolerance=tolerance,
        h=trace.grid.h,
        dt_min=dt_min,
        dt_max=dt_max,
        interior_sup=interior_sup,
        ring_sup=ring_sup,
        margin=margin,
        times=[trace.times[i] for i in indices],
    )


def check_dual_residual(
    trace: SolutionTrace,
    spec: ProblemSpec,
    index: int,
    factor: float = DUAL_RESIDUAL_FACTOR,
    dual_spacing: Optional[float] = None,
) -> DualResidualResult:
    """
    max |r| ≤ factor·(h + Δt entre snapshots) no snapshot index.
    """
    result = dual_residual(trace, spec, index, spacing=dual_spacing)
    tolerance = factor * (trace.grid.h + result.snapshot_dt)
    dt_min, dt_max = _dt_range(trace)
    passed = None if result.n_valid == 0 else result.max_abs <= tolerance
    return DualResidualResult(
        passed=passed,
        tolerance=tolerance,
        h=trace.grid.h,
        dt_min=dt_min,
        dt_max=dt_max,
        note="" if result.n_valid else "nenhum nó dual válido",
        t=result.t,
        snapshot_dt=result.snapshot_dt,
        max_abs=result.max_abs,
        mean_abs=result.mean_abs,
        n_valid=result.n_valid,
        n_singular=result.n_singular,
        n_excluded=result.n_excluded,
    )


def holder_seminorm(
    times: Sequence[float],
    points: np.ndarray,
    values: np.ndarray,
    alpha: float,
    n_pairs: int = HOLDER_PAIRS,
    seed: int = 0,
    field: str = "u",
) -> HolderResult:
    """
    Seminorma de Hölder parabólica estimada por pares amostrados.

    max |f(x,t) - f(y,τ)| / (|x-y|² + |t-τ|)^{α/2} sobre pares de uma sequência
    de Sobol embaralhada e semeada; aumentar n_pairs só acrescenta pares.
    Os instantes são só os dos snapshots gravados, então a parte temporal
    depende de quantos foram pedidos; com menos de MIN_HOLDER_TIMES há aviso.

    Args:
        times: Instantes (K,)
        points: Pontos espaciais comuns (N, 2)
        values: Valores, formato (K, N)
        alpha: Expoente em (0, 1]
        n_pairs: Número de pares
        seed: Semente da sequência

    Returns:
        HolderResult: Estimativa da seminorma
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"Expoente alpha deve estar em (0, 1]: {alpha!r}")
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    n_times, n_points = values.shape
    if n_times < MIN_HOLDER_TIMES:
        logger.warning(
            "Seminorma de Hölder de %s com apenas %d instantes gravados; a parte temporal depende dos snapshots",
            field, n_times,
        )

    m = max(1, int(math.ceil(math.log2(max(n_pairs, 2)))))
    sampler = qmc.Sobol(d=4, scramble=True, seed=seed)
    sample = sampler.random_base2(m)[:n_pairs]
    k1 = np.minimum((sample[:, 0] * n_times).astype(int), n_times - 1)
    p1 = np.minimum((sample[:, 1] * n_points).astype(int), n_points - 1)
    k2 = np.minimum((sample[:, 2] * n_times).astype(int), n_times - 1)
    p2 = np.minimum((sample[:, 3] * n_points).astype(int), n_points - 1)

    dist2 = np.sum((points[p1] - points[p2]) ** 2, axis=1) + np.abs(times[k1] - times[k2])
    distinct = dist2 > 0.0
    diff = np.abs(values[k1, p1] - values[k2, p2])
    quotient = diff[distinct] / dist2[distinct] ** (0.5 * alpha)
    seminorm = float(quotient.max()) if quotient.size else 0.0
    return HolderResult(alpha=alpha, seminorm=seminorm, n_pairs=int(n_pairs), field=field, n_times=int(n_times))


def trace_holder_seminorm(trace: SolutionTrace, alpha: float, n_pairs: int = HOLDER_PAIRS, seed: int = 0) -> HolderResult:
    values = np.stack([u.values for u in trace.snapshots])
    return holder_seminorm(trace.times, trace.grid.points, values, alpha, n_pairs, seed, field="u")


def trace_ut_holder_seminorm(trace: SolutionTrace, alpha: float, n_pairs: int = HOLDER_PAIRS, seed: int = 0) -> HolderResult:
    """
    Seminorma do quociente discreto u_t entre snapshots consecutivos (apenas medida).
    """
    if len(trace.snapshots) < 3:
        raise ValueError("São necessários ao menos três snapshots")
    times = np.asarray(trace.times)
    values = np.stack([u.values for u in trace.snapshots])
    rates = np.diff(values, axis=0) / np.diff(times)[:, None]
    midpoints = 0.5 * (times[1:] + times[:-1])
    return holder_seminorm(midpoints, trace.grid.points, rates, alpha, n_pairs, seed, field="u_t")


def _sup_gradient(trace: SolutionTrace) -> float:
    final = gradient_central(trace.final)
    sup_final = float(np.max(np.hypot(final[:, 0], final[:, 1])))
    series = trace.column("max_gradient")
    return max(sup_final, float(series.max())) if series.size else sup_final


def check_gcf_gradient_bound(
    trace: SolutionTrace,
    refined: Optional[SolutionTrace] = None,
    kappa: float = KAPPA,
) -> GradientBoundResult:
    """
    sup |Du| sobre a execução e sua estabilidade sob refinamento (h, h/2).

    Com o traço refinado, a razão entre os sups deve ficar abaixo de 1 + κ·h.
    """
    sup = _sup_gradient(trace)
    tolerance = kappa * trace.grid.h
    dt_min, dt_max = _dt_range(trace)
    common = dict(tolerance=tolerance, h=trace.grid.h, dt_min=dt_min, dt_max=dt_max, sup_gradient=sup, kappa=kappa)
    if refined is None:
        return GradientBoundResult(passed=None, note="sem par de refinamento", **common)

    sup_refined = _sup_gradient(refined)
    ratio = max(sup, sup_refined) / min(sup, sup_refined)
    return GradientBoundResult(
        passed=ratio <= 1.0 + tolerance,
        sup_gradient_refined=sup_refined,
        ratio=ratio,
        **common,
    )


def check_c0_bounds(trace: SolutionTrace, spec: ProblemSpec, kappa: float = KAPPA) -> C0BoundsResult:
    """
    Limites C⁰: max u ≤ max em ∂_pQ_T (convexidade em x) e
    min u ≥ min φ(·,0) - T·sup ψ⁺ (MA_h ≥ 0 em campos convexos; no fluxo de Gauss
    a velocidade é não negativa e o termo em ψ some).

    As asserções só se aplicam a execuções discretamente convexas.
    """
    grid = trace.grid
    max_u = max(float(trace.column("max_u").max()), float(trace.final.interior.max()))
    min_u = min(float(trace.column("min_u").min()), float(trace.final.interior.min()))

    first = trace.snapshots[0]
    boundary_max = float(first.values.max())
    step_times = list(trace.column("t")) + [trace.times[-1]]
    sup_psi = 0.0
    for t in step_times:
        boundary_max = max(boundary_max, float(np.max(spec.phi_at(grid.boundary_points, t))))
        if spec.kind == EquationKind.PMA:
            sup_psi = max(sup_psi, float(np.max(spec.psi_at(grid.interior_points, t))))
    lower = float(first.values.min()) - spec.horizon * sup_psi

    tolerance = kappa * grid.h
    dt_min, dt_max = _dt_range(trace)
    convex = bool(np.all(trace.column("min_mah") > 0.0))
    passed = None
    if convex:
        passed = max_u <= boundary_max + tolerance and min_u >= lower - tolerance
    return C0BoundsResult(
        passed=passed,
        tolerance=tolerance,
        h=grid.h,
        dt_min=dt_min,
        dt_max=dt_max,
        note="" if convex else "execução não convexa; limites relatados",
        max_u=max_u,
        min_u=min_u,
        boundary_max=boundary_max,
        lower_barrier=lower,
        kappa=kappa,
    )
