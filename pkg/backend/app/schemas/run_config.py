"""
Schemas do Pydantic para a configuração de uma execução
"""
import hashlib
import json
import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.exceptions import ParseError, RangeError, UnknownKey
from app.domain.problem.entities import EquationKind

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "verify", "legendre", "counterexample", "convergence")

_RANGE_ERRORS = {"greater_than", "greater_than_equal", "less_than", "less_than_equal", "too_short", "too_long"}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainSection(_Section):
    """
    Domínio do problema (os problemas embutidos usam o disco unitário)
    """
    kind: Literal["disk", "ellipse"] = Field("disk", description="Tipo de domínio")
    radius: float = Field(1.0, gt=0.0, description="Raio do disco")
    center: Tuple[float, float] = Field((0.0, 0.0), description="Centro")
    q: Optional[List[List[float]]] = Field(None, description="Matriz da elipse (x-c)ᵀQ(x-c) < 1")

    def params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"radius": self.radius, "center": self.center}
        if self.q is not None:
            params["q"] = self.q
        return params


class ExpressionsSection(_Section):
    psi: str = Field(..., description="Forçante ψ(x1, x2, t)")
    phi: str = Field(..., description="Dado de fronteira φ(x1, x2, t)")
    exact: Optional[str] = Field(None, description="Solução exata, se conhecida")


class ProblemSection(_Section):
    """
    Problema da biblioteca (name) ou definido por expressões
    """
    name: Optional[str] = Field(None, description="Nome do problema embutido")
    params: Dict[str, float] = Field(default_factory=dict, description="Parâmetros do problema embutido")
    expressions: Optional[ExpressionsSection] = None
    kind: EquationKind = Field(EquationKind.PMA, description="pma ou gcf (problemas por expressões)")
    c0: float = Field(1.0, gt=0.0, description="Constante c₀ de (P1)")

    @model_validator(mode="after")
    def _one_source(self) -> 'ProblemSection':
        if (self.name is None) == (self.expressions is None):
            raise ValueError("Informe exatamente um de 'name' ou 'expressions'")
        return self


class SolverSection(_Section):
    stencil: Literal[1, 2] = 2
    safety: float = Field(0.5, gt=0.0, le=1.0)
    snap_fraction: float = Field(0.25, ge=0.0, lt=1.0, description="Fração do braço abaixo da qual o nó vira âncora de Dirichlet (0: fronteira exata)")
    scheme: Literal["monotone", "central"] = "monotone"


class TolerancesSection(_Section):
    kappa: float = Field(10.0, gt=0.0, description="Folga κ das asserções (κ·h)")
    comparison: float = Field(1e-12, ge=0.0)
    comparison_pairs: int = Field(20, ge=1, description="Pares ordenados sorteados da comparação")
    condition: float = Field(1e-8, ge=0.0)
    compatibility: float = Field(1e-6, ge=0.0)
    dual_residual_factor: float = Field(5.0, gt=0.0)
    condition_density: Optional[int] = Field(None, ge=2, description="Densidade de amostragem de (P1)-(P3)")
    convergence_floor: float = Field(1e-11, gt=0.0, description="Erros abaixo disso contam como exatos")
    holder_alpha: float = Field(0.5, gt=0.0, le=1.0, description="Expoente da seminorma de Hölder")
    holder_pairs: int = Field(100_000, ge=1, description="Pares amostrados da seminorma")


class GcfSection(_Section):
    gamma: float = Field(1.0, gt=0.0, le=1.0)
    refine: bool = Field(True, description="Executa também em h/2 para a cota do gradiente")


class CounterexampleSection(_Section):
    A: float = Field(1.0, gt=0.0)
    B: float = Field(1.0, gt=0.0)
    amplitudes: List[float] = Field(default_factory=lambda: [1.0, 10.0, 100.0])
    search: bool = True
    stride: int = Field(1, ge=1, description="Passos entre campos u_xx gravados")
    n: Optional[int] = Field(None, ge=2, description="Dimensão do problema radial")

    @field_validator("amplitudes")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if any(a <= 0.0 for a in value):
            raise ValueError("Amplitudes devem ser positivas")
        return value


class LegendreSection(_Section):
    spacing: Optional[float] = Field(None, gt=0.0, description="Espaçamento dual (padrão 2h)")
    padding: float = Field(0.1, ge=0.0)
    method: Literal["separable", "brute"] = "separable"
    box: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None


class RunConfig(_Section):
    """
    Configuração completa e resolvida de uma execução.
    """
    command: Literal["solve", "verify", "legendre", "counterexample", "convergence"]
    problem: ProblemSection
    h: float = Field(0.125, gt=0.0, description="Espaçamento da grade")
    T: Optional[float] = Field(None, gt=0.0, description="Horizonte (padrão: o do problema)")
    output_times: List[float] = Field(default_factory=list)
    out: Optional[str] = Field(None, description="Diretório de saída")
    seed: int = Field(0, ge=0, description="Semente de toda amostragem")
    levels: List[float] = Field(default_factory=lambda: [0.125, 0.0625, 0.03125], description="h da convergência")
    domain: Optional[DomainSection] = None
    solver: SolverSection = Field(default_factory=SolverSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    gcf: GcfSection = Field(default_factory=GcfSection)
    counterexample: CounterexampleSection = Field(default_factory=CounterexampleSection)
    legendre: LegendreSection = Field(default_factory=LegendreSection)

    @field_validator("problem", mode="before")
    @classmethod
    def _problem_by_name(cls, value: Any) -> Any:
        if isinstance(value, str):
            return {"name": value}
        return value

    @field_validator("levels")
    @classmethod
    def _positive_levels(cls, value: List[float]) -> List[float]:
        if not value or any(h <= 0.0 for h in value):
            raise ValueError("Níveis de convergência devem ser positivos")
        return value

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def config_hash(config: RunConfig) -> str:
    """
    SHA-256 do JSON canônico da configuração resolvida.
    """
    blob = json.dumps(config.resolved(), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _translate(error: ValidationError) -> Exception:
    errors = error.errors()

    def location(item: Dict[str, Any]) -> str:
        return ".".join(str(part) for part in item["loc"])

    for item in errors:
        if item["type"] == "extra_forbidden":
            return UnknownKey(location(item))
    for item in errors:
        if item["type"] in _RANGE_ERRORS:
            return RangeError(f"{location(item)}: {item['msg']} (valor {item.get('input')!r})")
    first = errors[0]
    return ParseError(f"{location(first)}: {first['msg']}")


def validate_config(data: Dict[str, Any]) -> RunConfig:
    """
    Valida um dicionário como RunConfig.

    Raises:
        UnknownKey: Chave não reconhecida
        RangeError: Valor fora do intervalo (h ≤ 0, T ≤ 0, ...)
        ParseError: Demais erros de tipo ou estrutura
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as error:
        raise _translate(error) from error


def parse_config(text: str, defaults: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Lê uma configuração JSON (UTF-8) e preenche os padrões.

    Args:
        text: Documento JSON
        defaults: Valores usados quando a chave estiver ausente do documento

    Returns:
        RunConfig: Configuração validada

    Raises:
        ParseError: JSON malformado (com linha e coluna) ou estrutura inválida
        UnknownKey: Chave não reconhecida
        RangeError: Valor fora do intervalo
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(f"JSON inválido na linha {error.lineno}, coluna {error.colno}: {error.msg}") from error
    if not isinstance(data, dict):
        raise ParseError("A configuração deve ser um objeto JSON")
    config = validate_config({**(defaults or {}), **data})
    logger.info("Configuração resolvida: %s", json.dumps(config.resolved(), sort_keys=True))
    return config


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """
    Aplica substituições da linha de comando (valores None são ignorados) e revalida.
    """
    updates = {key: value for key, value in overrides.items() if value is not None}
    if not updates:
        return config
    return validate_config({**config.resolved(), **updates})
