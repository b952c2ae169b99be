"""
Pool de workers limitado por PMAFLOW_THREADS
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from app.core.config import get_settings

T = TypeVar('T')
R = TypeVar('R')


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """
    Aplica func a cada item preservando a ordem de entrada.

    Com um único worker a execução é sequencial no thread atual.

    Args:
        func: Função pura a ser aplicada
        items: Itens independentes

    Returns:
        List[R]: Resultados na mesma ordem dos itens
    """
    items = list(items)
    workers = min(get_settings().threads, max(len(items), 1))
    if workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
