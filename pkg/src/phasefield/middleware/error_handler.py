"""
Error Handler
=============

Manejo centralizado de errores de la CLI: toda excepción se convierte en el
payload ``{"error": {"type", "code", "message", "details"}}`` y en un código
de salida.
"""
import logging
from typing import Any, Dict, Tuple

from pydantic import ValidationError

from ..core.environment import get_settings
from ..core.exceptions import (
    ConfigValidationError,
    DivergenceError,
    ErrorCode,
    GateFailedError,
    NewtonConvergenceError,
    PhaseFieldError,
    StepError,
)
from ..schemas.base import ErrorBody, ErrorSchema

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_DIVERGED = 4


class ErrorHandler:
    """Traduce excepciones a (código de salida, payload de error)"""

    def __init__(self):
        self.settings = get_settings()

    def handle(self, exc: BaseException) -> Tuple[int, Dict[str, Any]]:
        logger.error(f"Ejecución abortada: {exc}", exc_info=self.settings.debug)

        if isinstance(exc, ConfigValidationError):
            return EXIT_CONFIG, self._payload(exc.to_dict())
        if isinstance(exc, GateFailedError):
            return EXIT_GATE, self._payload(exc.to_dict())
        if isinstance(exc, (StepError, DivergenceError, NewtonConvergenceError)):
            return EXIT_DIVERGED, self._payload(exc.to_dict())
        if isinstance(exc, PhaseFieldError):
            return EXIT_ERROR, self._payload(exc.to_dict())
        if isinstance(exc, ValidationError):
            return EXIT_CONFIG, self._handle_pydantic_validation_error(exc)
        if isinstance(exc, OSError):
            return EXIT_ERROR, self._payload({
                "type": type(exc).__name__,
                "code": ErrorCode.INTERNAL,
                "message": f"I/O error: {exc}",
                "details": None,
            })
        return EXIT_ERROR, self._handle_generic_error(exc)

    def _payload(self, body: Dict[str, Any]) -> Dict[str, Any]:
        return ErrorSchema(error=ErrorBody(**body)).model_dump()

    def _handle_pydantic_validation_error(self, exc: ValidationError) -> Dict[str, Any]:
        return self._payload({
            "type": "ValidationError",
            "code": ErrorCode.INVALID_VALUE,
            "message": "validation error",
            "details": {"errors": exc.errors(include_url=False)},
        })

    def _handle_generic_error(self, exc: BaseException) -> Dict[str, Any]:
        """Detalles de la excepción solo en modo debug"""
        return self._payload({
            "type": "InternalError",
            "code": ErrorCode.INTERNAL,
            "message": "internal error",
            "details": {
                "exception_type": type(exc).__name__,
                "exception_message": str(exc),
            } if self.settings.debug else None,
        })
