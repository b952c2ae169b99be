"""
Entidades do resultado de uma execução.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class RunOutcome:
    """
    Desfecho de um comando: veredito das verificações asseridas e artefatos gravados.

    Attributes:
        command: Comando executado
        passed: True se todas as verificações asseridas passaram
        artifacts: Identificadores dos artefatos gravados
        summary: Resumo para log e testes
    """
    command: str
    passed: bool
    artifacts: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1
