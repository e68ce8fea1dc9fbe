# Schemas module
from .base import BaseSchema, ErrorBody, ErrorSchema
from .reports import LevelResult, MonitorReport, PropertyResult, PropertySuiteReport, RateFit, RateReport
from .run_config import RunConfig, load_config, parse_config

__all__ = [
    "BaseSchema",
    "ErrorBody",
    "ErrorSchema",
    "LevelResult",
    "MonitorReport",
    "PropertyResult",
    "PropertySuiteReport",
    "RateFit",
    "RateReport",
    "RunConfig",
    "load_config",
    "parse_config",
]
