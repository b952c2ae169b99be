"""
Exceções de domínio do pmaflow.

Erros de validação também derivam de ValueError, como nos objetos de valor.
"""
from typing import Optional


class PMAFlowError(Exception):
    """
    Exceção base de todos os erros do pacote.
    """


class NonConvexDomain(PMAFlowError, ValueError):
    """Forma quadrática do domínio não é definida positiva."""


class EmptyGrid(PMAFlowError, ValueError):
    """Nenhum ponto da rede está no interior do domínio."""


class OutsideDomain(PMAFlowError, ValueError):
    """Ponto fora do domínio aberto."""


class EvaluationError(PMAFlowError, ValueError):
    """Dado ψ ou φ não finito em um ponto amostrado."""


class UnknownProblem(PMAFlowError, KeyError):
    """Nome de problema fora da biblioteca."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "problema desconhecido"


class SingularHessian(PMAFlowError, ValueError):
    """Determinante abaixo do limiar de singularidade."""


class DualGridTooSmall(PMAFlowError, ValueError):
    """A caixa dual imposta não cobre a imagem do gradiente."""


class DegenerateDual(PMAFlowError, ValueError):
    """Snapshot não convexo; o transformado de Legendre não representa u."""


class IncompatibleTraces(PMAFlowError, ValueError):
    """Traços com grades, passos ou ordenação de dados incompatíveis."""


class SolverError(PMAFlowError):
    """
    Erro de integração temporal com o instante da falha anexado.
    """

    def __init__(self, message: str, failure_time: Optional[float] = None):
        super().__init__(message)
        self.failure_time = failure_time

    def __str__(self) -> str:
        base = super().__str__()
        if self.failure_time is None:
            return base
        return f"{base} (t = {self.failure_time!r})"


class StiffnessOverflow(SolverError):
    """Passo CFL abaixo de dt_min: explosão das segundas derivadas."""


class NonFiniteField(SolverError):
    """Atualização produziu valores não finitos."""


class ConfigError(PMAFlowError, ValueError):
    """Base dos erros de configuração."""


class ParseError(ConfigError):
    """Texto de configuração malformado."""


class UnknownKey(ConfigError):
    """Chave de configuração não reconhecida."""

    def __init__(self, key: str):
        super().__init__(f"Chave desconhecida na configuração: {key}")
        self.key = key


class RangeError(ConfigError):
    """Valor de configuração fora do intervalo permitido."""
