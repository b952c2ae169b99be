"""
Adaptador que grava os artefatos de uma execução em disco (CSV e JSON).

A formatação não depende de relógio nem de locale: números em ponto flutuante
com 17 algarismos significativos nas tabelas, chaves ordenadas nos documentos.
"""
import csv
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

import numpy as np

from app.domain.results.interfaces import ResultWriter

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """
    Célula de CSV determinística.
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def to_jsonable(value: Any) -> Any:
    """
    Converte tipos numpy, enums e não finitos (→ None) para JSON estrito.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dump_json(payload: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


class FileResultWriter(ResultWriter):
    """
    Implementação do ResultWriter sobre um diretório.

    Tabelas levam um cabeçalho "# config_hash=..." antes da linha de colunas;
    documentos JSON levam a chave "config_hash".
    """

    def __init__(self, out_dir: Path, config_hash: str):
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def write_table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        path = self.out_dir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            handle.write(f"# config_hash={self.config_hash}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(list(columns))
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        logger.info("Tabela gravada: %s", path)
        return str(path)

    def write_document(self, name: str, payload: Dict[str, Any]) -> str:
        path = self.out_dir / f"{name}.json"
        path.write_text(dump_json({**payload, "config_hash": self.config_hash}), encoding="utf-8")
        logger.info("Documento gravado: %s", path)
        return str(path)

    def write_failure(self, error: BaseException) -> str:
        payload = {"error": type(error).__name__, "message": str(error)}
        failure_time = getattr(error, "failure_time", None)
        if failure_time is not None:
            payload["failure_time"] = failure_time
        return self.write_document("failure", payload)
