"""
Configuración de Ambientes
=========================

Configuración del entorno de ejecución (logs, directorios, hilos).

Los parámetros de un experimento NO viven aquí: se leen del archivo de
configuración JSON (ver ``schemas.run_config``). La única variable de entorno
que afecta a los artefactos de un experimento es ``PHASEFIELD_OUTPUT_DIR``.
"""
from enum import Enum
from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Environment(str, Enum):
    """Ambientes disponibles"""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class AppConfig(BaseSettings):
    """Configuración principal de la aplicación"""

    model_config = SettingsConfigDict(
        env_prefix="PHASEFIELD_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        validate_assignment=True,
    )

    name: str = Field(default="Caginalp Type III Galerkin Solver")
    version: str = Field(default="1.0.0")
    environment: Environment = Field(default=Environment.DEVELOPMENT)
    debug: bool = Field(default=False)

    # Directorios
    output_dir: str = Field(default="outputs")
    log_dir: str = Field(default="logs")
    log_level: str = Field(default="INFO")

    @field_validator("environment", mode="before")
    @classmethod
    def validate_environment(cls, v):
        if isinstance(v, str):
            try:
                return Environment(v.lower())
            except ValueError:
                raise ValueError(f"Invalid environment: {v}. Must be one of: {[e.value for e in Environment]}")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Invalid log level: {v}")
        return level


@lru_cache()
def get_settings() -> AppConfig:
    """Obtener configuración de la aplicación"""
    return AppConfig()
