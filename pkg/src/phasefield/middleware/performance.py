"""
Performance
===========

Medición del tiempo de cada subcomando.
"""
import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator

logger = logging.getLogger(__name__)

SLOW_SECONDS = 60.0


@contextmanager
def track_performance(label: str) -> Iterator[Dict[str, float]]:
    """Registra la duración de un bloque; el dict devuelto recibe ``elapsed``"""
    timing: Dict[str, float] = {}
    start = time.perf_counter()
    try:
        yield timing
    finally:
        timing["elapsed"] = time.perf_counter() - start
        logger.info(f"{label} completado en {timing['elapsed']:.3f}s")
        if timing["elapsed"] > SLOW_SECONDS:
            logger.warning(f"Ejecución lenta: {label} tardó {timing['elapsed']:.1f}s")
