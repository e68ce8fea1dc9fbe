"""
Schemas de Reportes
===================

Reportes serializables producidos por diagnósticos, barridos y la suite de
propiedades. Los valores no finitos se serializan como ``null`` en JSON y se
listan en ``flagged``.
"""
import math
from typing import Any, Dict, List, Optional, Tuple

from pydantic import Field, computed_field

from .base import BaseSchema, MetadataSchema


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


class MonitorReport(MetadataSchema):
    """Canales escalares de un monitor sobre una trayectoria"""
    channels: Dict[str, float] = Field(default_factory=dict, description="Canal → valor")
    times: List[float] = Field(default_factory=list, description="Malla temporal de los canales")
    free_energy_trace: List[float] = Field(default_factory=list, description="Ψ(w_t, u) en cada nodo")
    flagged: List[str] = Field(default_factory=list, description="Canales no finitos")

    @property
    def is_finite(self) -> bool:
        return not self.flagged

    def rows(self) -> List[Tuple[str, float]]:
        return list(self.channels.items())

    def group(self, names) -> Dict[str, float]:
        return {name: self.channels[name] for name in names if name in self.channels}


class LevelResult(BaseSchema):
    """Resultado de un nivel de un barrido o de un refinamiento"""
    index: int = Field(..., ge=0, description="Posición en la escalera")
    value: float = Field(..., description="Valor del parámetro en este nivel")
    status: str = Field("ok", pattern="^(ok|failed)$", description="ok | failed")
    channels: Dict[str, float] = Field(default_factory=dict, description="Canales de error")
    monitor: Dict[str, float] = Field(default_factory=dict, description="Canales del monitor del nivel")
    error: Optional[Dict[str, Any]] = Field(None, description="Error del nivel fallido")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class RateFit(BaseSchema):
    """Ajuste por mínimos cuadrados log err = p log x + c"""
    slope: Optional[float] = None
    intercept: Optional[float] = None
    residual: Optional[float] = None
    n_points: int = 0

    @computed_field
    @property
    def valid(self) -> bool:
        return self.slope is not None


class RateReport(MetadataSchema):
    """Reporte de un barrido: canales por nivel y pendientes ajustadas"""
    parameter: str = Field(..., description="beta | eps | n_modes | dt")
    ladder: List[float] = Field(default_factory=list, description="Valores del parámetro")
    reference: Optional[float] = Field(None, description="Valor del parámetro de referencia")
    levels: List[LevelResult] = Field(default_factory=list)
    fits: Dict[str, RateFit] = Field(default_factory=dict, description="Ajuste por canal")
    gates: Dict[str, bool] = Field(default_factory=dict, description="Puertas de aceptación evaluadas")

    @computed_field
    @property
    def failures(self) -> List[int]:
        return [level.index for level in self.levels if not level.ok]

    @property
    def slopes(self) -> Dict[str, Optional[float]]:
        return {name: fit.slope for name, fit in self.fits.items()}

    @property
    def passed(self) -> bool:
        return not self.failures and all(self.gates.values())

    def channel(self, name: str) -> List[float]:
        """Valores de un canal a lo largo de la escalera (NaN en niveles fallidos)"""
        return [level.channels.get(name, float("nan")) if level.ok else float("nan") for level in self.levels]


class PropertyResult(BaseSchema):
    """Resultado de una propiedad de la suite de comprobación"""
    name: str
    passed: bool
    elapsed_seconds: float = 0.0
    details: Dict[str, Any] = Field(default_factory=dict)


class PropertySuiteReport(MetadataSchema):
    results: List[PropertyResult] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


__all__ = [
    "MonitorReport",
    "LevelResult",
    "RateFit",
    "RateReport",
    "PropertyResult",
    "PropertySuiteReport",
    "finite_or_none",
]
