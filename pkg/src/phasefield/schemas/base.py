"""
Schemas Base
============

Schemas base con la configuración común para configuraciones y reportes.
"""
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class BaseSchema(BaseModel):
    """Schema base: claves desconocidas rechazadas, asignación validada"""

    model_config = ConfigDict(
        extra="forbid",
        validate_assignment=True,
        use_enum_values=True,
        populate_by_name=True,
    )


class MetadataSchema(BaseSchema):
    """Schema con metadatos libres de la ejecución"""
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Metadatos de la ejecución")


class ErrorBody(BaseSchema):
    """Cuerpo del error legible por máquina"""
    type: str = Field(..., description="Tipo de error")
    code: str = Field(..., description="Código de error estable (E001…E999)")
    message: str = Field(..., description="Mensaje de error")
    details: Optional[Dict[str, Any]] = Field(None, description="Detalles del error")


class ErrorSchema(BaseSchema):
    """Schema del archivo error.json"""
    error: ErrorBody

