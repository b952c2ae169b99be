"""
Configuração centralizada de logging
"""
import logging
import sys

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_configured = False


def configure_logging(level: str = "INFO") -> None:
    """
    Configura o logger raiz do pacote app com saída em stderr.

    Os logs nunca são gravados nos arquivos de resultado.

    Args:
        level: Nível de log (DEBUG, INFO, WARNING, ...)
    """
    global _configured
    app_logger = logging.getLogger("app")
    app_logger.setLevel(level.upper())

    if _configured:
        return

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    app_logger.addHandler(console_handler)
    app_logger.propagate = False
    _configured = True
