"""
Configurações de ambiente do pmaflow
"""
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Configurações lidas de variáveis de ambiente (prefixo PMAFLOW_) ou do arquivo .env.

    Attributes:
        threads: Limite de workers para varreduras paralelas
        log_level: Nível de log do processo
        output_dir: Diretório padrão de saída dos artefatos
    """
    model_config = SettingsConfigDict(
        env_prefix="PMAFLOW_",
        env_file=".env",
        extra="ignore",
    )

    threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    output_dir: str = "results"


@lru_cache
def get_settings() -> Settings:
    """
    Retorna a instância única de configurações.

    Returns:
        Settings: Configurações carregadas do ambiente
    """
    return Settings()
