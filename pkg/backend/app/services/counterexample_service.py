"""
Contraexemplos de convexidade: perturbação por bump, solvers reduzidos 1D e
radial, e detecção da perda de convexidade.

O operador 1D é linear, então u = v + A·z para a resposta z à perturbação de
amplitude unitária; a busca do limiar A* usa essa decomposição. O relatório
de cada A continua vindo de uma solução direta.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from app.core.exceptions import NonFiniteField, StiffnessOverflow
from app.core.parallel import parallel_map
from app.domain.counterexample.entities import ConvexityLossReport, RadialProblem, ReducedTrace, line_points
from app.domain.counterexample.value_objects.bump_forcing import BumpForcing
from app.domain.counterexample.value_objects.bump_params import BumpParams, p6
from app.domain.problem.entities import ProblemSpec
from app.domain.problem.interfaces import ScalarData
from app.domain.problem.value_objects.expression import ScalarExpression
from app.services.problem_service import validate_conditions

logger = logging.getLogger(__name__)

DT_FACTOR = 0.4
DT_MIN_FACTOR = 1e-10
THRESHOLD_DOUBLINGS = 20
THRESHOLD_BISECTIONS = 30
DEFAULT_AMPLITUDES = (1.0, 10.0, 100.0)
SCAN_STEP = 1e-4
# Amostras por unidade das condições (P1)-(P3) do problema perturbado
CONDITION_DENSITY = 64
# ρ nas extremidades: zero exato ou abaixo do menor normal
UNDERFLOW_LEVEL = 1e-300

__all__ = [
    "bump_w",
    "bump_rho",
    "bump_derivative",
    "p6",
    "uniform_nodes",
    "solve_1d",
    "run_counterexample_1d",
    "solve_radial",
    "radial_forcing",
    "run_counterexample_radial",
]


def bump_w(x, t, params: BumpParams):
    return params.w(x, t)


def bump_rho(x, t, params: BumpParams):
    return params.rho(x, t)


def bump_derivative(x, t, params: BumpParams, order: int):
    return params.derivative(x, t, order)


def uniform_nodes(h: float) -> np.ndarray:
    """
    Nós i/N, i = 0..N, com N = 1/h.

    Raises:
        ValueError: Se h não for da forma 1/N com N >= 2
    """
    if not h > 0.0:
        raise ValueError(f"Espaçamento h deve ser positivo: {h!r}")
    n = int(round(1.0 / h))
    if n < 2 or abs(n * h - 1.0) > 1e-9:
        raise ValueError(f"h deve ser da forma 1/N com N >= 2: {h!r}")
    return np.arange(n + 1) / n


def _evaluate(data: ScalarData, x: np.ndarray, t: float) -> np.ndarray:
    return np.array(np.broadcast_to(data.evaluate(line_points(x), t), x.shape), dtype=float)


def _output_times(horizon: float, output_times: Optional[Sequence[float]]) -> List[float]:
    times = sorted({0.0, horizon} if output_times is None else {0.0, horizon, *map(float, output_times)})
    for t in times:
        if not 0.0 <= t <= horizon:
            raise ValueError(f"Instante de saída fora de [0, T]: {t!r}")
    return times


def _store_snapshots(
    trace: ReducedTrace,
    pending: List[float],
    t: float,
    t_next: float,
    before: np.ndarray,
    after: np.ndarray,
    boundary: Callable[[float], Tuple[float, float]],
    left_fixed: bool,
) -> None:
    while pending and pending[0] <= t_next:
        t_out = pending.pop(0)
        if t_out == t_next:
            snapshot = after.copy()
        else:
            theta = (t_out - t) / (t_next - t)
            snapshot = (1.0 - theta) * before + theta * after
            left, right = boundary(t_out)
            if left_fixed:
                snapshot[0] = left
            snapshot[-1] = right
        trace.times.append(t_out)
        trace.snapshots.append(snapshot)


def solve_1d(
    psi: ScalarData,
    phi: ScalarData,
    h: float,
    horizon: float,
    output_times: Optional[Sequence[float]] = None,
    stride: int = 0,
) -> ReducedTrace:
    """
    Marcha explícita de u_t = u_xx - ψ em (0, 1) com u = φ em ∂_pQ_T.

    O passo é uniforme, T/⌈T/(0.4h²)⌉ ≤ 0.4h². Cada passo registra min/max de
    u_xx no campo do início do passo; o estado final também é registrado.

    Args:
        psi: Forçante ψ(x, t)
        phi: Dado de fronteira e inicial φ(x, t)
        h: Espaçamento (1/N)
        horizon: Horizonte T
        output_times: Instantes de saída adicionais
        stride: Grava o campo u_xx a cada stride passos (0: não grava)

    Returns:
        ReducedTrace: Snapshots e série de u_xx

    Raises:
        NonFiniteField: Se a atualização produzir valores não finitos
    """
    if not horizon > 0.0:
        raise ValueError(f"Horizonte T deve ser positivo: {horizon!r}")
    x = uniform_nodes(h)
    h = float(x[1])
    n_steps = int(math.ceil(horizon / (DT_FACTOR * h * h)))
    dt = horizon / n_steps
    ends = x[[0, -1]]

    def boundary(t: float) -> Tuple[float, float]:
        values = _evaluate(phi, ends, t)
        return float(values[0]), float(values[1])

    u = _evaluate(phi, x, 0.0)
    trace = ReducedTrace(nodes=x, dt=dt)
    trace.times.append(0.0)
    trace.snapshots.append(u.copy())
    pending = _output_times(horizon, output_times)[1:]
    inner = x[1:-1]

    for k in range(n_steps):
        t = k * dt
        u_xx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
        trace.record(t, u_xx, inner, keep_field=stride > 0 and k % stride == 0)

        t_next = horizon if k + 1 == n_steps else (k + 1) * dt
        nxt = np.empty_like(u)
        nxt[1:-1] = u[1:-1] + dt * (u_xx - _evaluate(psi, inner, t))
        nxt[0], nxt[-1] = boundary(t_next)
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteField("Solução 1D com valores não finitos", failure_time=t)
        _store_snapshots(trace, pending, t, t_next, u, nxt, boundary, left_fixed=True)
        u = nxt

    u_xx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    trace.record(horizon, u_xx, inner, keep_field=stride > 0)
    logger.debug("Solver 1D: %d passos, dt=%.3g, min u_xx=%.6g", n_steps, dt, min(trace.min_second))
    return trace


def find_threshold(margin: Callable[[float], float], start: float = 1.0) -> Optional[float]:
    """
    Menor A > 0 com margin(A) < 0, por duplicação e bissecção.

    margin deve ser côncava em A (mínimo de funções afins), o que torna o
    conjunto {A ≥ 0 : margin(A) < 0} um intervalo [A*, ∞).

    Returns:
        Optional[float]: A* aproximado, 0.0 se já falha em A = 0, None se a
        duplicação não encontrar mudança de sinal
    """
    if margin(0.0) < 0.0:
        return 0.0
    lo, hi = 0.0, float(start)
    for _ in range(THRESHOLD_DOUBLINGS + 1):
        if margin(hi) < 0.0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return None
    for _ in range(THRESHOLD_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if margin(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rho_scan(params: BumpParams, t: float, step: float = SCAN_STEP) -> Dict[str, float]:
    """
    Varredura densa de ρ(·, t) em (0, 1): extremos e onde ocorrem.
    """
    x = np.arange(1, int(round(1.0 / step))) * step
    values = np.asarray(params.rho(x, t))
    lo, hi = int(np.argmin(values)), int(np.argmax(values))
    return {"t": t, "min": float(values[lo]), "argmin": float(x[lo]), "max": float(values[hi]), "argmax": float(x[hi])}


def _direct_1d(spec: ProblemSpec, params: BumpParams, h: float) -> ReducedTrace:
    return solve_1d(BumpForcing(spec.psi, params), spec.phi, h, spec.horizon)


def run_counterexample_1d(
    spec: ProblemSpec,
    params: Optional[BumpParams] = None,
    h: float = 1.0 / 32.0,
    amplitudes: Optional[Sequence[float]] = None,
    search: bool = True,
    stride: int = 1,
) -> ConvexityLossReport:
    """
    Resolve -u_t + u_xx = ψ + ρ diretamente e mede min u_xx sobre Q_T.

    Também confere a superposição u = v + w contra a solução direta, a nulidade
    de ρ em x ∈ {0, 1} e, se search, o limiar A* pela decomposição linear.
    As condições (P1)-(P3) do problema com ψ + ρ vão para details.

    Args:
        spec: Problema base unidimensional
        params: Parâmetros do bump (padrão: os do problema)
        h: Espaçamento
        amplitudes: Varredura opcional em A (soluções diretas em paralelo)
        search: Executa a busca do limiar
        stride: Passos entre campos u_xx gravados para a busca

    Returns:
        ConvexityLossReport: Relatório do experimento
    """
    if not spec.is_one_dimensional:
        raise ValueError(f"Problema {spec.name} não é unidimensional")
    params = params or spec.bump or BumpParams.create()
    horizon = spec.horizon
    checkpoints = [0.5 * horizon, horizon]

    base = solve_1d(spec.psi, spec.phi, h, horizon, output_times=checkpoints, stride=stride if search else 0)
    direct = solve_1d(BumpForcing(spec.psi, params), spec.phi, h, horizon, output_times=checkpoints)
    gap = 0.0
    for t, u, v in zip(direct.times, direct.snapshots, base.snapshots):
        gap = max(gap, float(np.max(np.abs(u - (v + np.asarray(params.w(direct.nodes, t)))))))

    ends = np.array([0.0, 1.0])
    rho_endpoint = max(float(np.max(np.abs(params.rho(ends, t)))) for t in direct.record_times)
    if rho_endpoint > UNDERFLOW_LEVEL:
        logger.warning("ρ não se anula nas extremidades: %g", rho_endpoint)

    threshold = None
    if search:
        zero = ScalarExpression.create(0)
        unit = solve_1d(BumpForcing(zero, params.with_amplitude(1.0)), zero, h, horizon, stride=stride)
        v_fields = np.stack(base.second_fields)
        z_fields = np.stack(unit.second_fields)
        threshold = find_threshold(lambda a: float(np.min(v_fields + a * z_fields)))
        logger.info("Limiar 1D (B=%g, h=%g): A* = %s", params.b, direct.h, threshold)

    rows = []
    if amplitudes:
        sweep = parallel_map(lambda a: _direct_1d(spec, params.with_amplitude(a), h), list(amplitudes))
        for a, trace in zip(amplitudes, sweep):
            minimum = trace.overall_minimum()
            rows.append({"A": float(a), "min_second_derivative": minimum["value"], "psi_at_r0": None})

    bumped = spec.replace(name=f"{spec.name}+rho", psi=BumpForcing(spec.psi, params), exact=None)
    conditions = validate_conditions(bumped, CONDITION_DENSITY)

    minimum = direct.overall_minimum()
    return ConvexityLossReport(
        a=params.a,
        b=params.b,
        h=direct.h,
        dt=direct.dt,
        min_second_derivative=minimum["value"],
        location_x=minimum["x"],
        location_t=minimum["t"],
        threshold=threshold,
        rows=rows,
        details={
            "superposition_gap": gap,
            "h2_plus_dt": direct.h ** 2 + direct.dt,
            "rho_endpoint_max": rho_endpoint,
            "rho_scan": rho_scan(params, min(1.0, horizon)),
            "base_min_second_derivative": base.overall_minimum()["value"],
            "bumped_conditions": conditions.to_dict(),
            "failed_conditions": conditions.failed_conditions(),
        },
    )


def _radial_operator(v: np.ndarray, r: np.ndarray, h: float, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    (v_rr, v_r/r, taxa (v_r/r)^{n-1}·v_rr, cota de Lipschitz) nos nós r[:-1].

    Em r = 0 a extensão par dá v_rr(0) = 2(v₁ - v₀)/h² e v_r/r → v_rr(0).
    """
    v_rr = np.empty(r.size - 1)
    v_rr[0] = 2.0 * (v[1] - v[0]) / (h * h)
    v_rr[1:] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    ratio = np.empty_like(v_rr)
    ratio[0] = v_rr[0]
    ratio[1:] = (v[2:] - v[:-2]) / (2.0 * h) / r[1:-1]
    rate = ratio ** (n - 1) * v_rr

    coef = np.abs(ratio) ** (n - 1)
    coef[0] = n * abs(v_rr[0]) ** (n - 1)
    lip = 2.0 * coef / (h * h)
    lip[1:] += (n - 1) * np.abs(ratio[1:]) ** (n - 2) * np.abs(v_rr[1:]) / (r[1:-1] * h)
    return v_rr, ratio, rate, float(np.max(lip))


def solve_radial(
    problem: RadialProblem,
    h: float,
    horizon: Optional[float] = None,
    output_times: Optional[Sequence[float]] = None,
) -> ReducedTrace:
    """
    Marcha explícita de v_t = (v_r/r)^{n-1}·v_rr - ψ em [0, 1) com v(1, t) = φ(1, t).

    O nó r = 0 usa o limite v_t(0) = v_rr(0)ⁿ - ψ(0, t). dt = min(0.4h², 0.8/L)
    com L a cota de Lipschitz do operador discreto no passo. A medida de
    convexidade registrada é min(v_rr, v_r/r), os autovalores da Hessiana de
    v(|x|).

    Raises:
        NonFiniteField: Se a atualização produzir valores não finitos
        StiffnessOverflow: Se o passo cair abaixo de 1e-10·T
    """
    horizon = problem.horizon if horizon is None else float(horizon)
    if not horizon > 0.0:
        raise ValueError(f"Horizonte T deve ser positivo: {horizon!r}")
    r = uniform_nodes(h)
    h = float(r[1])
    n = problem.dimension
    dt_cap = DT_FACTOR * h * h
    dt_min = DT_MIN_FACTOR * horizon
    inner = r[:-1]

    def boundary(t: float) -> Tuple[float, float]:
        return math.nan, float(problem.phi_at(r[-1:], t)[0])

    v = np.array(problem.phi_at(r, 0.0), dtype=float)
    if r.size < 5:
        raise ValueError(f"Solver radial exige h <= 1/4: {h!r}")
    trace = ReducedTrace(nodes=r, dt=0.0)
    trace.times.append(0.0)
    trace.snapshots.append(v.copy())
    pending = _output_times(horizon, output_times)[1:]

    t = 0.0
    while t < horizon:
        v_rr, ratio, rate, lip = _radial_operator(v, r, h, n)
        trace.record(t, np.minimum(v_rr, ratio), inner, keep_field=False)
        if not trace.negative_slope and np.any(ratio[1:] < 0.0):
            trace.negative_slope = True
            logger.warning("Inclinação radial negativa em t=%.6g: perfil deixou de ser convexo-radial", t)

        dt = min(dt_cap, 0.8 / lip) if lip > 0.0 else dt_cap
        if dt < dt_min:
            raise StiffnessOverflow(f"Passo radial {dt!r} abaixo de dt_min {dt_min!r}", failure_time=t)
        t_next = t + dt
        if t_next >= horizon or horizon - t_next <= 1e-14 * horizon:
            t_next = horizon
            dt = horizon - t

        nxt = np.empty_like(v)
        nxt[:-1] = v[:-1] + dt * (rate - problem.psi_at(inner, t))
        nxt[-1] = boundary(t_next)[1]
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteField("Solução radial com valores não finitos", failure_time=t)
        _store_snapshots(trace, pending, t, t_next, v, nxt, boundary, left_fixed=False)
        trace.dt = max(trace.dt, dt)
        v, t = nxt, t_next

    v_rr, ratio, _, _ = _radial_operator(v, r, h, n)
    trace.record(horizon, np.minimum(v_rr, ratio), inner, keep_field=False)
    return trace


def radial_derivatives(v: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (v_r, v_rr) em todos os nós: centrais no interior, extensão par em r = 0 e
    fórmulas unilaterais de segunda ordem em r = 1.
    """
    h = float(r[1] - r[0])
    v_r = np.empty_like(v)
    v_rr = np.empty_like(v)
    v_r[0] = 0.0
    v_rr[0] = 2.0 * (v[1] - v[0]) / (h * h)
    v_r[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    v_rr[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    v_r[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    v_rr[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    return v_r, v_rr


def radial_forcing(
    problem: RadialProblem,
    params: BumpParams,
    r: np.ndarray,
    t: float,
    v_r: np.ndarray,
    v_rr: np.ndarray,
) -> np.ndarray:
    """
    Ψ = ψ + ((v_r+w_r)/r)^{n-1}(v_rr+w_rr) - (v_r/r)^{n-1}v_rr - w_t, o dado
    para o qual u = v + w resolve a equação radial (r > 0).

    O termo -v_t foi trocado por ψ - (v_r/r)^{n-1}v_rr via a equação de v; onde
    w e suas derivadas se anulam (r = 1) o colchete cancela exatamente e Ψ = ψ.
    """
    r = np.asarray(r, dtype=float)
    n = problem.dimension
    w_t = np.asarray(params.w_t(r, t))
    w_r = np.asarray(params.w_x(r, t))
    w_rr = np.asarray(params.w_xx(r, t))
    perturbed = ((v_r + w_r) / r) ** (n - 1) * (v_rr + w_rr)
    unperturbed = (v_r / r) ** (n - 1) * v_rr
    return problem.psi_at(r, t) + (perturbed - unperturbed) - w_t


def _radial_min_eigen(
    snapshots: Sequence[Tuple[float, np.ndarray]],
    r: np.ndarray,
    params: Optional[BumpParams],
) -> Tuple[float, float, float]:
    """
    (min de min(u_rr, u_r/r), r, t) para u = v + w sobre os snapshots dados, nós r[:-1].

    Sem parâmetros (A = 0) mede a própria solução base.
    """
    best = (math.inf, math.nan, math.nan)
    inner = r[:-1]
    for t, v in snapshots:
        v_r, v_rr = radial_derivatives(v, r)
        u_rr = v_rr[:-1].copy()
        slope = v_r[1:-1].copy()
        if params is not None:
            u_rr += np.asarray(params.w_xx(inner, t))
            slope += np.asarray(params.w_x(inner[1:], t))
        ratio = np.empty_like(u_rr)
        ratio[0] = u_rr[0]
        ratio[1:] = slope / inner[1:]
        second = np.minimum(u_rr, ratio)
        k = int(np.argmin(second))
        if second[k] < best[0]:
            best = (float(second[k]), float(inner[k]), float(t))
    return best


def run_counterexample_radial(
    problem: RadialProblem,
    h: float = 1.0 / 32.0,
    amplitudes: Sequence[float] = DEFAULT_AMPLITUDES,
    search: bool = True,
) -> ConvexityLossReport:
    """
    Varre A avaliando Ψ(r₀, t*) com t* = min(1, T) e r₀ = argmin de w_rr(·, t*).

    Ψ decresce em A (ajuste linear com inclinação negativa); u = v + w perde a
    convexidade radial a partir de um A* encontrado por duplicação e bissecção.

    Args:
        problem: Problema radial com o bump
        h: Espaçamento
        amplitudes: Amplitudes da varredura
        search: Executa a busca do limiar

    Returns:
        ConvexityLossReport: Relatório do experimento
    """
    params = problem.bump or BumpParams.create()
    t_star = min(1.0, problem.horizon)
    base = solve_radial(problem, h, output_times=[t_star])
    r = base.nodes
    snapshots = [(t, v) for t, v in zip(base.times, base.snapshots) if t > 0.0]
    v_star = base.snapshots[base.times.index(t_star)]
    v_r, v_rr = radial_derivatives(v_star, r)

    scan = np.arange(1, int(round(1.0 / SCAN_STEP))) * SCAN_STEP
    unit = params.with_amplitude(1.0)
    r0 = float(scan[int(np.argmin(np.asarray(unit.w_xx(scan, t_star))))])
    v_r0 = np.interp(r0, r, v_r)
    v_rr0 = np.interp(r0, r, v_rr)
    ends = np.array([1.0])

    def evaluate(a: float) -> Dict[str, float]:
        scaled = params.with_amplitude(a)
        psi_r0 = float(radial_forcing(problem, scaled, np.array([r0]), t_star, np.array([v_r0]), np.array([v_rr0]))[0])
        boundary = radial_forcing(problem, scaled, ends, t_star, v_r[-1:], v_rr[-1:])
        value, _, _ = _radial_min_eigen(snapshots, r, scaled)
        return {
            "A": float(a),
            "min_second_derivative": value,
            "psi_at_r0": psi_r0,
            "boundary_gap": float(np.max(np.abs(boundary - problem.psi_at(ends, t_star)))),
        }

    rows = parallel_map(evaluate, list(amplitudes))
    psi_values = [row["psi_at_r0"] for row in rows]
    fit = None
    if len(set(amplitudes)) >= 2:
        regression = linregress(list(amplitudes), psi_values)
        fit = {"slope": float(regression.slope), "intercept": float(regression.intercept),
               "r_squared": float(regression.rvalue ** 2)}
    ordered = [row["psi_at_r0"] for row in sorted(rows, key=lambda row: row["A"])]
    decreasing = bool(np.all(np.diff(ordered) < 0.0))

    threshold = None
    if search:
        threshold = find_threshold(
            lambda a: _radial_min_eigen(snapshots, r, unit.with_amplitude(a) if a > 0.0 else None)[0]
        )
        logger.info("Limiar radial (n=%d, B=%g, h=%g): A* = %s", problem.dimension, params.b, base.h, threshold)

    value, location_r, location_t = _radial_min_eigen(snapshots, r, params)
    return ConvexityLossReport(
        a=params.a,
        b=params.b,
        h=base.h,
        dt=base.dt,
        min_second_derivative=value,
        location_x=location_r,
        location_t=location_t,
        threshold=threshold,
        rows=[{k: row[k] for k in ("A", "min_second_derivative", "psi_at_r0")} for row in rows],
        details={
            "dimension": problem.dimension,
            "r0": r0,
            "w_r_at_r0": float(unit.w_x(r0, t_star)),
            "w_rr_at_r0": float(unit.w_xx(r0, t_star)),
            "psi_fit": fit,
            "psi_decreasing": decreasing,
            "boundary_gap_max": max(row["boundary_gap"] for row in rows),
            "negative_slope": base.negative_slope,
            "base_min_second_derivative": float(min(base.min_second)),
        },
    )
