"""
Interfaces abstratas para a gravação de artefatos de resultado.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, Sequence


class ResultWriter(ABC):
    """
    Interface abstrata para o destino dos artefatos de uma execução.

    Toda saída carrega o hash da configuração que a produziu.
    """

    @abstractmethod
    def write_table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """
        Grava uma tabela.

        Args:
            name: Nome do artefato (sem extensão)
            columns: Cabeçalho
            rows: Linhas na ordem das colunas

        Returns:
            str: Identificador do artefato gravado
        """

    @abstractmethod
    def write_document(self, name: str, payload: Dict[str, Any]) -> str:
        """
        Grava um documento estruturado (relatório, configuração resolvida).
        """

    @abstractmethod
    def write_failure(self, error: BaseException) -> str:
        """
        Grava o documento de falha legível por máquina.
        """
