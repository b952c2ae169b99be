"""
Integração temporal explícita de -u_t + det D²u = ψ e do fluxo de Gauss (γ).

O passo de Euler explícito com o operador monótono MA_h preserva o princípio
de comparação discreto enquanto dt respeita a cota de estabilidade.
"""
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import IncompatibleTraces, NonFiniteField, StiffnessOverflow
from app.domain.geometry.entities import Grid, GridFunction
from app.domain.problem.entities import EquationKind, ProblemSpec
from app.domain.solution.entities import SolutionTrace, SolverState, StepDiagnostics
from app.services.ma_operators import (
    det_d2_monotone,
    eig_2x2,
    gradient_central,
    hessian_central,
    monotone_lipschitz,
)
from app.services.problem_service import validate_conditions

logger = logging.getLogger(__name__)

DEFAULT_SAFETY = 0.5
DT_MIN_FACTOR = 1e-10
# Piso de MA_h na derivada de (MA_h)⁺^γ quando γ < 1
GCF_MA_FLOOR = 1e-6
SCHEMES = ("monotone", "central")

# Dimensão espacial do solver completo
_N = 2


def gcf_speed(ma: np.ndarray, gradient: np.ndarray, gamma: float) -> np.ndarray:
    """
    Velocidade do fluxo γ: (MA)⁺^γ · (1+|Du|²)^{(1-(n+2)γ)/2} com n = 2.
    """
    grad2 = np.sum(np.asarray(gradient) ** 2, axis=-1)
    exponent = 0.5 * (1.0 - (_N + 2) * gamma)
    return np.maximum(ma, 0.0) ** gamma * (1.0 + grad2) ** exponent


def gauss_curvature_speed(ma: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """
    Fluxo por curvatura de Gauss do gráfico: det D²u / (1+|Du|²)^{(n+1)/2}.
    """
    grad2 = np.sum(np.asarray(gradient) ** 2, axis=-1)
    return np.maximum(ma, 0.0) / (1.0 + grad2) ** (0.5 * (_N + 1))


def _ma_value(u: GridFunction, stencil: int, scheme: str) -> np.ndarray:
    if scheme == "monotone":
        return det_d2_monotone(u, stencil)
    if scheme == "central":
        return hessian_central(u).determinant
    raise ValueError(f"Esquema desconhecido: {scheme!r} (use {', '.join(SCHEMES)})")


def stability_bound(state: SolverState, spec: ProblemSpec, stencil: int = 2) -> float:
    """
    Máximo por nó da derivada da atualização em relação a u(p).

    Para PMA é a cota de Lipschitz de MA_h; para o fluxo γ ela é multiplicada
    por γ·max(MA_h, piso)^{γ-1}·(1+|Du|²)^{(1-4γ)/2}.
    """
    bound = monotone_lipschitz(state.u, stencil)
    if spec.kind == EquationKind.GCF:
        ma = det_d2_monotone(state.u, stencil)
        grad2 = np.sum(gradient_central(state.u) ** 2, axis=1)
        gamma = spec.gamma
        factor = gamma * np.maximum(ma, GCF_MA_FLOOR) ** (gamma - 1.0)
        bound = bound * factor * (1.0 + grad2) ** (0.5 * (1.0 - (_N + 2) * gamma))
    return float(np.max(bound)) if bound.size else 0.0


def cfl_dt(
    state: SolverState,
    spec: ProblemSpec,
    safety: float = DEFAULT_SAFETY,
    stencil: int = 2,
    dt_min: Optional[float] = None,
) -> float:
    """
    Passo explícito estável: safety / max L, limitado a T - t.

    Em braços uniformes equivale a safety·h²/(2·Σ aᵢᵢ_max) com aᵢⱼ = det D²u·u^{ij};
    para u = |x|²/2 resulta dt = safety·h²/4.

    Args:
        state: Estado atual
        spec: Problema
        safety: Fator de segurança em (0, 1]
        stencil: Largura do estêncil
        dt_min: Passo mínimo (padrão 1e-10·T)

    Returns:
        float: Incremento de tempo

    Raises:
        StiffnessOverflow: Se o passo ficar abaixo de dt_min
    """
    return dt_from_bound(stability_bound(state, spec, stencil), state, spec, safety, dt_min)


def dt_from_bound(
    bound: float,
    state: SolverState,
    spec: ProblemSpec,
    safety: float = DEFAULT_SAFETY,
    dt_min: Optional[float] = None,
) -> float:
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"Fator de segurança deve estar em (0, 1]: {safety!r}")
    dt_min = DT_MIN_FACTOR * spec.horizon if dt_min is None else dt_min
    remaining = spec.horizon - state.t
    if bound <= 0.0:
        return remaining

    dt = safety / bound
    if dt < dt_min:
        raise StiffnessOverflow(
            f"Passo CFL {dt!r} abaixo de dt_min {dt_min!r}",
            failure_time=state.t,
        )
    return min(dt, remaining)


def _advance(state: SolverState, spec: ProblemSpec, dt: float, rate: np.ndarray) -> SolverState:
    u = state.u
    interior = u.interior + dt * rate
    t_next = state.t + dt
    if abs(spec.horizon - t_next) <= 1e-14 * spec.horizon:
        t_next = spec.horizon
    boundary = np.asarray(spec.phi_at(u.grid.boundary_points, t_next), dtype=float)
    if not (np.all(np.isfinite(interior)) and np.all(np.isfinite(boundary))):
        raise NonFiniteField("Atualização com valores não finitos", failure_time=state.t)
    return SolverState(t_next, u.with_interior(interior, boundary), state.step + 1, dt)


def pma_rate(state: SolverState, spec: ProblemSpec, stencil: int = 2, scheme: str = "monotone") -> np.ndarray:
    """
    Taxa u_t = MA_h[u] - ψ(·, t) nos nós interiores.
    """
    ma = _ma_value(state.u, stencil, scheme)
    return ma - spec.psi_at(state.u.grid.interior_points, state.t)


def gcf_rate(state: SolverState, spec: ProblemSpec, stencil: int = 2, scheme: str = "monotone") -> np.ndarray:
    ma = _ma_value(state.u, stencil, scheme)
    return gcf_speed(ma, gradient_central(state.u), spec.gamma)


def step_pma(state: SolverState, spec: ProblemSpec, dt: float, stencil: int = 2, scheme: str = "monotone") -> SolverState:
    """
    uⁿ⁺¹ = uⁿ + dt·(MA_h[uⁿ] - ψ(·, tⁿ)) no interior; fronteira = φ(·, tⁿ⁺¹).

    Raises:
        NonFiniteField: Se a atualização produzir valores não finitos
    """
    return _advance(state, spec, dt, pma_rate(state, spec, stencil, scheme))


def step_gcf(state: SolverState, spec: ProblemSpec, dt: float, stencil: int = 2, scheme: str = "monotone") -> SolverState:
    """
    uⁿ⁺¹ = uⁿ + dt·(MA_h[uⁿ])⁺^γ·(1+|Du|²)^{(1-4γ)/2}; fronteira = φ(·, tⁿ⁺¹).

    Raises:
        NonFiniteField: Se a atualização produzir valores não finitos
    """
    return _advance(state, spec, dt, gcf_rate(state, spec, stencil, scheme))


def _rate(state: SolverState, spec: ProblemSpec, stencil: int, scheme: str) -> np.ndarray:
    if spec.kind == EquationKind.GCF:
        return gcf_rate(state, spec, stencil, scheme)
    return pma_rate(state, spec, stencil, scheme)


def initial_state(spec: ProblemSpec, grid: Grid) -> SolverState:
    """
    u(·, 0) = φ(·, 0) em todos os nós.
    """
    return SolverState(0.0, GridFunction.from_function(grid, lambda p: spec.phi_at(p, 0.0)))


def _safe_min(values: np.ndarray) -> float:
    return float(np.min(values)) if values.size else math.nan


def _safe_max(values: np.ndarray) -> float:
    return float(np.max(values)) if values.size else math.nan


def step_diagnostics(
    state: SolverState,
    spec: ProblemSpec,
    rate: np.ndarray,
    dt: float,
    bound: float,
    stencil: int = 2,
) -> StepDiagnostics:
    """
    Diagnósticos do campo no início do passo.

    Para PMA o quociente de atualização mais ψ é MA_h[u]; para o fluxo de Gauss
    (ψ ≡ 0) é a própria velocidade.
    """
    u = state.u
    grid = u.grid
    hessian = hessian_central(u)
    lam_min, lam_max = eig_2x2(hessian.xx, hessian.xy, hessian.yy)
    adjacent = grid.boundary_adjacent_nodes()
    if spec.kind == EquationKind.GCF:
        ut_psi = rate
    else:
        ut_psi = rate + spec.psi_at(grid.interior_points, state.t)
    return StepDiagnostics(
        step=state.step,
        t=state.t,
        dt=dt,
        min_ut_psi=_safe_min(ut_psi),
        max_ut_psi=_safe_max(ut_psi),
        min_lambda=_safe_min(lam_min),
        max_lambda=_safe_max(lam_max),
        min_lambda_boundary=_safe_min(lam_min[adjacent]),
        max_lambda_boundary=_safe_max(lam_max[adjacent]),
        min_mah=_safe_min(det_d2_monotone(u, stencil)),
        cfl_ratio=dt * bound,
        min_u=_safe_min(u.interior),
        max_u=_safe_max(u.interior),
        max_gradient=_safe_max(np.hypot(hessian.gradient[:, 0], hessian.gradient[:, 1])),
    )


def _output_times(spec: ProblemSpec, output_times: Optional[Iterable[float]]) -> List[float]:
    times = sorted({0.0, spec.horizon} if output_times is None else {0.0, *map(float, output_times)})
    for t in times:
        if not 0.0 <= t <= spec.horizon:
            raise ValueError(f"Instante de saída fora de [0, T]: {t!r}")
    return times


def _interpolate(spec: ProblemSpec, before: SolverState, after: SolverState, t: float) -> GridFunction:
    """
    Snapshot linear em t entre dois passos; a fronteira recebe φ(·, t) exato.
    """
    if t == after.t:
        return after.u.copy()
    theta = (t - before.t) / (after.t - before.t)
    interior = (1.0 - theta) * before.u.interior + theta * after.u.interior
    boundary = spec.phi_at(before.u.grid.boundary_points, t)
    return GridFunction(before.u.grid, interior, boundary)


def solve(
    spec: ProblemSpec,
    grid: Grid,
    output_times: Optional[Sequence[float]] = None,
    stencil: int = 2,
    safety: float = DEFAULT_SAFETY,
    dt_min: Optional[float] = None,
    scheme: str = "monotone",
    validate: bool = True,
) -> SolutionTrace:
    """
    Marcha de u(·,0) = φ(·,0) até T com dt adaptativo.

    Diagnósticos são registrados a cada passo e snapshots nos instantes de
    saída (t = 0 sempre incluído), por interpolação linear entre passos; os
    instantes de saída não alteram a sequência de passos.

    Args:
        spec: Problema (PMA ou GCF, bidimensional)
        grid: Grade
        output_times: Instantes de saída em [0, T]
        stencil: Largura do estêncil (1 ou 2)
        safety: Fator de segurança do CFL
        dt_min: Passo mínimo
        scheme: "monotone" ou "central" (controle negativo, não monótono)
        validate: Avalia (P1)-(P3) e registra avisos antes de integrar

    Returns:
        SolutionTrace: Snapshots e diagnósticos

    Raises:
        StiffnessOverflow, NonFiniteField: Com o instante da falha anexado
    """
    if spec.is_one_dimensional:
        raise ValueError("Problemas unidimensionais usam o solver dedicado dos contraexemplos")
    if validate:
        validate_conditions(spec, density=max(4, int(math.ceil(4.0 / grid.h))))

    times = _output_times(spec, output_times)
    state = initial_state(spec, grid)
    trace = SolutionTrace(spec=spec, grid=grid, stencil=stencil, scheme=scheme)
    trace.add_snapshot(0.0, state.u.copy())
    pending = [t for t in times if t > 0.0]

    while state.t < spec.horizon:
        bound = stability_bound(state, spec, stencil)
        dt = dt_from_bound(bound, state, spec, safety, dt_min)
        rate = _rate(state, spec, stencil, scheme)
        trace.diagnostics.append(step_diagnostics(state, spec, rate, dt, bound, stencil))
        nxt = _advance(state, spec, dt, rate)
        logger.debug("Passo %d: t=%.6g dt=%.3g", nxt.step, nxt.t, dt)

        while pending and pending[0] <= nxt.t:
            t_out = pending.pop(0)
            trace.add_snapshot(t_out, _interpolate(spec, state, nxt, t_out))
            logger.info("Snapshot em t=%.6g (%s, passo %d)", t_out, spec.name, nxt.step)
        state = nxt

    return trace


def solve_lockstep(
    spec_w: ProblemSpec,
    spec_v: ProblemSpec,
    grid: Grid,
    stencil: int = 2,
    safety: float = DEFAULT_SAFETY,
    scheme: str = "monotone",
) -> Tuple[SolutionTrace, SolutionTrace]:
    """
    Integra dois problemas na mesma sequência de passos (dt = mínimo dos CFL).

    Snapshots são gravados a cada passo, como exige a verificação do princípio
    de comparação.

    Raises:
        IncompatibleTraces: Se horizontes ou tipos de equação diferirem
    """
    if spec_w.horizon != spec_v.horizon or spec_w.kind != spec_v.kind:
        raise IncompatibleTraces("Execução em passo comum exige o mesmo horizonte e tipo de equação")

    states = [initial_state(spec_w, grid), initial_state(spec_v, grid)]
    specs = (spec_w, spec_v)
    traces = tuple(SolutionTrace(spec=s, grid=grid, stencil=stencil, scheme=scheme) for s in specs)
    for trace, state in zip(traces, states):
        trace.add_snapshot(0.0, state.u.copy())

    horizon = spec_w.horizon
    while states[0].t < horizon:
        bounds = [stability_bound(state, spec, stencil) for state, spec in zip(states, specs)]
        dt = min(dt_from_bound(b, state, spec, safety) for b, state, spec in zip(bounds, states, specs))
        for k, (state, spec) in enumerate(zip(states, specs)):
            bound = bounds[k]
            rate = _rate(state, spec, stencil, scheme)
            traces[k].diagnostics.append(step_diagnostics(state, spec, rate, dt, bound, stencil))
            states[k] = _advance(state, spec, dt, rate)
            traces[k].add_snapshot(states[k].t, states[k].u.copy())
    return traces
