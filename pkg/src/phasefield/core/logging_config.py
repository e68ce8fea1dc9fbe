"""
Configuración de Logging
========================

Sistema de logging centralizado. Solo la CLI llama a ``setup_logging``;
los servicios numéricos usan ``logging.getLogger(__name__)`` y las clases con
estado (repositorios) el ``LoggerMixin``.

Salidas:
    - consola (stderr): una línea por evento
    - ``<log_dir>/phasefield.log``: detalle con módulo, función y línea
    - ``<log_dir>/error.log``: solo errores, una línea JSON por evento
"""
import logging
import logging.config
from pathlib import Path
from typing import Any, Dict, List, Optional

from .environment import get_settings

ROOT_LOGGER = "phasefield"
LOG_FILE_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 5

FORMATTERS: Dict[str, Dict[str, str]] = {
    "console": {
        "format": "%(asctime)s %(levelname)-7s %(name)s: %(message)s",
        "datefmt": "%H:%M:%S",
    },
    "detailed": {
        "format": "%(asctime)s %(levelname)s %(name)s [%(module)s.%(funcName)s:%(lineno)d] %(message)s",
        "datefmt": "%Y-%m-%d %H:%M:%S",
    },
    "json": {
        "format": '{"time": "%(asctime)s", "logger": "%(name)s", "level": "%(levelname)s", '
                  '"where": "%(module)s.%(funcName)s:%(lineno)d", "message": "%(message)s"}',
        "datefmt": "%Y-%m-%dT%H:%M:%S",
    },
}


def _rotating(path: Path, level: str, formatter: str) -> Dict[str, Any]:
    return {
        "class": "logging.handlers.RotatingFileHandler",
        "level": level,
        "formatter": formatter,
        "filename": str(path),
        "maxBytes": LOG_FILE_BYTES,
        "backupCount": LOG_FILE_BACKUPS,
        "encoding": "utf-8",
    }


def _handlers(level: str, log_dir: Optional[Path]) -> Dict[str, Dict[str, Any]]:
    handlers: Dict[str, Dict[str, Any]] = {
        "console": {
            "class": "logging.StreamHandler",
            "level": level,
            "formatter": "console",
            "stream": "ext://sys.stderr",
        },
    }
    if log_dir is not None:
        handlers["run_file"] = _rotating(log_dir / "phasefield.log", "DEBUG", "detailed")
        handlers["error_file"] = _rotating(log_dir / "error.log", "ERROR", "json")
    return handlers


def setup_logging(level: Optional[str] = None, log_to_file: bool = True) -> None:
    """
    Configura el logger ``phasefield`` y sus hijos.

    Args:
        level: Nivel de consola; por defecto DEBUG en modo debug o
            ``PHASEFIELD_LOG_LEVEL``
        log_to_file: Si es False no se crean archivos (tests, corridas cortas)
    """
    settings = get_settings()
    level = (level or ("DEBUG" if settings.debug else settings.log_level)).upper()

    log_dir: Optional[Path] = None
    if log_to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

    handlers = _handlers(level, log_dir)
    names: List[str] = list(handlers)
    logging.config.dictConfig({
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": FORMATTERS,
        "handlers": handlers,
        "loggers": {
            ROOT_LOGGER: {
                # los archivos reciben DEBUG aunque la consola filtre más
                "level": "DEBUG" if log_dir is not None else level,
                "handlers": names,
                "propagate": False,
            },
        },
    })
    logging.getLogger(ROOT_LOGGER).debug(
        f"Logging listo: ambiente={settings.environment.value}, nivel={level}, handlers={names}"
    )


def get_logger(name: str) -> logging.Logger:
    """Logger hijo de ``phasefield``"""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


class LoggerMixin:
    """Da a la clase un ``self.logger`` con su nombre"""

    @property
    def logger(self) -> logging.Logger:
        return get_logger(self.__class__.__name__)
