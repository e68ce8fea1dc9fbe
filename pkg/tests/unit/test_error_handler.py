"""
Tests del manejo centralizado de errores
"""
import pytest
from pydantic import BaseModel, ValidationError

from phasefield.core.environment import get_settings
from phasefield.core.exceptions import (
    ConfigValidationError,
    DivergenceError,
    GateFailedError,
    NewtonConvergenceError,
    PhaseFieldError,
    StepError,
    TrajectoryError,
)
from phasefield.middleware.error_handler import (
    EXIT_CONFIG,
    EXIT_DIVERGED,
    EXIT_ERROR,
    EXIT_GATE,
    ErrorHandler,
)
from phasefield.schemas.base import ErrorSchema


class _IntModel(BaseModel):
    value: int


@pytest.mark.unit
class TestErrorHandler:

    @pytest.fixture
    def handler(self):
        return ErrorHandler()

    def test_config_error(self, handler):
        exc = ConfigValidationError([{"code": "E102", "message": "beta must be ≥ 0", "location": ["params", "beta"], "line": 3}])
        code, payload = handler.handle(exc)
        assert code == EXIT_CONFIG
        assert payload["error"]["code"] == "E102"
        assert payload["error"]["message"] == "beta must be ≥ 0"
        assert payload["error"]["details"]["errors"][0]["line"] == 3

    def test_gate_failure(self, handler):
        code, payload = handler.handle(GateFailedError("acceptance gates failed: order"))
        assert code == EXIT_GATE
        assert payload["error"]["type"] == "GateFailedError"
        assert payload["error"]["code"] == "E501"

    @pytest.mark.parametrize("exc", [
        StepError(0.5, NewtonConvergenceError(50, 1e-3)),
        DivergenceError("non-finite state after step"),
        NewtonConvergenceError(10, 1.0),
    ])
    def test_divergence(self, handler, exc):
        code, payload = handler.handle(exc)
        assert code == EXIT_DIVERGED
        assert set(payload["error"]) == {"type", "code", "message", "details"}

    def test_step_error_keeps_time_and_cause(self, handler):
        _, payload = handler.handle(StepError(0.25, DivergenceError("nan")))
        assert payload["error"]["code"] == "E302"
        assert payload["error"]["details"]["t"] == 0.25
        assert payload["error"]["details"]["cause"]["type"] == "DivergenceError"

    def test_domain_error(self, handler):
        code, payload = handler.handle(TrajectoryError("bad trajectory"))
        assert code == EXIT_ERROR
        assert payload["error"]["code"] == "E304"
        assert payload["error"]["details"] is None

    def test_pydantic_error(self, handler):
        with pytest.raises(ValidationError) as exc_info:
            _IntModel(value="not a number")
        code, payload = handler.handle(exc_info.value)
        assert code == EXIT_CONFIG
        assert payload["error"]["code"] == "E100"

    def test_generic_error_hides_details(self, handler):
        code, payload = handler.handle(RuntimeError("secret"))
        assert code == EXIT_ERROR
        assert payload["error"]["code"] == "E999"
        assert payload["error"]["details"] is None

    def test_generic_error_details_in_debug(self, monkeypatch):
        monkeypatch.setenv("PHASEFIELD_DEBUG", "true")
        get_settings.cache_clear()
        _, payload = ErrorHandler().handle(RuntimeError("secret"))
        assert payload["error"]["details"]["exception_message"] == "secret"

    def test_payload_matches_error_schema(self, handler):
        _, payload = handler.handle(StepError(0.5, NewtonConvergenceError(50, 1e-3)))
        assert ErrorSchema.model_validate(payload).error.code == "E301"

    def test_payload_rejects_unknown_fields(self, handler):
        with pytest.raises(ValidationError):
            handler._payload({"type": "X", "code": "E999", "message": "m", "details": None, "extra": 1})

    def test_base_error_default_code(self):
        assert PhaseFieldError("x").to_dict()["code"] == "E999"
