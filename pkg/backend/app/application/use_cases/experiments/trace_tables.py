"""
Tabelas comuns aos comandos que integram no tempo.
"""
from typing import List

from app.domain.results.interfaces import ResultWriter
from app.domain.solution.entities import SolutionTrace

DIAGNOSTIC_COLUMNS = (
    ("step", "step"),
    ("t", "t"),
    ("dt", "dt"),
    ("min_ut_psi", "min_ut_psi"),
    ("max_ut_psi", "max_ut_psi"),
    ("min_lambda", "min_lambda"),
    ("max_lambda", "max_lambda"),
    ("min_MAh", "min_mah"),
    ("min_lambda_boundary", "min_lambda_boundary"),
    ("max_lambda_boundary", "max_lambda_boundary"),
    ("cfl_ratio", "cfl_ratio"),
    ("min_u", "min_u"),
    ("max_u", "max_u"),
    ("max_gradient", "max_gradient"),
)


def write_diagnostics(writer: ResultWriter, trace: SolutionTrace, name: str = "diagnostics") -> str:
    rows = ([getattr(d, attr) for _, attr in DIAGNOSTIC_COLUMNS] for d in trace.diagnostics)
    return writer.write_table(name, [column for column, _ in DIAGNOSTIC_COLUMNS], rows)


def write_snapshots(writer: ResultWriter, trace: SolutionTrace, prefix: str = "snapshot") -> List[str]:
    """
    Um CSV (x1, x2, u) por snapshot, nós interiores primeiro.
    """
    artifacts = []
    points = trace.grid.points
    for k, u in enumerate(trace.snapshots):
        rows = zip(points[:, 0], points[:, 1], u.values)
        artifacts.append(writer.write_table(f"{prefix}_{k:03d}", ("x1", "x2", "u"), rows))
    return artifacts


def snapshot_index_table(trace: SolutionTrace) -> List[dict]:
    return [{"index": k, "t": t} for k, t in enumerate(trace.times)]
