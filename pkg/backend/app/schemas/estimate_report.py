"""
Schemas do Pydantic para o relatório de estimativas
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class CheckBase(BaseModel):
    """
    Campos comuns a toda verificação: veredito, tolerância e discretização.

    passed = None indica verificação não aplicável (hipótese do resultado falha).
    """
    passed: Optional[bool] = Field(..., description="Veredito (None: não aplicável)")
    tolerance: float = Field(..., description="Tolerância usada")
    h: float = Field(..., description="Espaçamento da grade")
    dt_min: Optional[float] = Field(None, description="Menor passo de tempo da execução")
    dt_max: Optional[float] = Field(None, description="Maior passo de tempo da execução")
    note: str = Field("", description="Observação")


class ComparisonResult(CheckBase):
    violations: int = Field(..., description="Pares (nó, passo) com w > v + tolerância")
    worst_gap: float = Field(..., description="max(w - v) sobre a execução")
    n_steps: int
    n_pairs: int = Field(1, description="Pares ordenados (w, v) verificados")


class UtBoundsResult(CheckBase):
    measured_min: float
    measured_max: float
    theoretical_lower: Optional[float] = Field(None, description="min{c₀, min MA_h[φ(·,0)]}")
    margin: Optional[float] = None
    kappa: float


class EigenBoundsResult(CheckBase):
    interior_min_lambda: float
    interior_max_lambda: float
    boundary_min_lambda: float
    boundary_max_lambda: float
    dual_lower_bound: float = Field(..., description="min sobre snapshots de 1/(sup ‖D²U‖ no anel)")
    margin: float
    kappa: float


class DualMaxPrincipleResult(CheckBase):
    interior_sup: float
    ring_sup: float
    margin: float
    times: List[float]


class DualResidualResult(CheckBase):
    t: float
    snapshot_dt: float
    max_abs: float
    mean_abs: float
    n_valid: int
    n_singular: int
    n_excluded: int


class HolderResult(BaseModel):
    alpha: float
    seminorm: float
    n_pairs: int
    field: str = "u"
    n_times: Optional[int] = Field(None, description="Instantes amostrados")


class GradientBoundResult(CheckBase):
    sup_gradient: float
    sup_gradient_refined: Optional[float] = None
    ratio: Optional[float] = None
    kappa: float


class C0BoundsResult(CheckBase):
    max_u: float
    min_u: float
    boundary_max: float
    lower_barrier: float = Field(..., description="min φ(·,0) - T·sup ψ⁺ (fluxo de Gauss: min φ(·,0))")
    kappa: float


class EstimateReport(BaseModel):
    """
    Relatório autodescritivo com todas as verificações de uma execução.
    """
    problem: str
    h: float
    config_hash: str = ""
    conditions: Optional[Dict[str, Any]] = None
    compatibility: Optional[Dict[str, Any]] = None
    ut_bounds: Optional[UtBoundsResult] = None
    eigen_bounds: Optional[EigenBoundsResult] = None
    dual_max_principle: Optional[DualMaxPrincipleResult] = None
    dual_residual: Optional[DualResidualResult] = None
    c0_bounds: Optional[C0BoundsResult] = None
    comparison: Optional[ComparisonResult] = None
    comparison_control: Optional[ComparisonResult] = Field(
        None, description="Esquema central com dados côncavos; relatado, nunca asserido",
    )
    gradient_bound: Optional[GradientBoundResult] = None
    holder: List[HolderResult] = Field(default_factory=list)

    def asserted_checks(self) -> Dict[str, bool]:
        """
        Verificações com veredito definido (as não aplicáveis ficam de fora).
        """
        checks = {}
        for name in (
            "ut_bounds", "eigen_bounds", "dual_max_principle", "dual_residual",
            "c0_bounds", "comparison", "gradient_bound",
        ):
            result = getattr(self, name)
            if result is not None and result.passed is not None:
                checks[name] = result.passed
        return checks

    @property
    def passed(self) -> bool:
        return all(self.asserted_checks().values())
