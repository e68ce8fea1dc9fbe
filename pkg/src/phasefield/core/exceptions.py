"""
Excepciones del Sistema
=======================

Jerarquía única de errores con códigos estables. El ``ErrorHandler`` de
``middleware.error_handler`` los convierte en el JSON de error de la CLI.
"""
from typing import Any, Dict, List, Optional


class ErrorCode:
    """Códigos de error estables (parte del contrato de la CLI)"""
    SYNTAX = "E001"
    INVALID_VALUE = "E100"
    UNKNOWN_GRAPH = "E101"
    NEGATIVE_BETA = "E102"
    MISSING_KEY = "E103"
    UNKNOWN_KEY = "E104"
    SHAPE_MISMATCH = "E201"
    INVALID_DOMAIN = "E202"
    GRAPH_DOMAIN = "E203"
    NEWTON = "E301"
    DIVERGED = "E302"
    STEP = "E303"
    TRAJECTORY = "E304"
    MMS = "E401"
    SWEEP = "E402"
    GATE_FAILED = "E501"
    INTERNAL = "E999"


class PhaseFieldError(Exception):
    """Error base del sistema"""

    code: str = ErrorCode.INTERNAL

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}
        if code is not None:
            self.code = code

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": type(self).__name__,
            "code": self.code,
            "message": self.message,
            "details": self.details or None,
        }


class ShapeMismatchError(PhaseFieldError):
    code = ErrorCode.SHAPE_MISMATCH


class InvalidDomainError(PhaseFieldError):
    code = ErrorCode.INVALID_DOMAIN


class GraphDomainError(PhaseFieldError):
    """Argumento fuera de D(γ)"""
    code = ErrorCode.GRAPH_DOMAIN


class ConfigValidationError(PhaseFieldError):
    """Errores de validación del archivo de configuración"""
    code = ErrorCode.INVALID_VALUE

    def __init__(self, errors: List[Dict[str, Any]]):
        self.errors = errors
        first = errors[0] if errors else {"code": ErrorCode.INVALID_VALUE, "message": "invalid configuration"}
        super().__init__(first["message"], details={"errors": errors}, code=first["code"])


class NewtonConvergenceError(PhaseFieldError):
    code = ErrorCode.NEWTON

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Newton did not converge after {iterations} iterations (residual {residual:.3e})",
            details={"iterations": iterations, "residual": residual},
        )
        self.iterations = iterations
        self.residual = residual


class DivergenceError(PhaseFieldError):
    code = ErrorCode.DIVERGED


class StepError(PhaseFieldError):
    """Fallo de un paso de tiempo, con el instante en que ocurrió"""
    code = ErrorCode.STEP

    def __init__(self, t: float, cause: PhaseFieldError):
        details = {"t": t, "cause": cause.to_dict()}
        super().__init__(f"step failed at t={t:.6g}: {cause.message}", details=details, code=cause.code)
        self.t = t
        self.cause = cause


class TrajectoryError(PhaseFieldError):
    code = ErrorCode.TRAJECTORY


class MMSConfigurationError(PhaseFieldError):
    code = ErrorCode.MMS


class SweepError(PhaseFieldError):
    code = ErrorCode.SWEEP


class GateFailedError(PhaseFieldError):
    code = ErrorCode.GATE_FAILED
