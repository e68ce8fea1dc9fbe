"""
Schema de Configuración de Experimentos
=======================================

Un archivo de configuración JSON describe un experimento completo. Solo
``domain.lengths`` es obligatorio; el resto tiene valores por defecto
documentados en el README. Las claves desconocidas se rechazan.

``parse_config`` devuelve un ``RunConfig`` validado o lanza
``ConfigValidationError`` con una lista de errores, cada uno con su código y
la línea del archivo donde aparece la clave.
"""
import json
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Union

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_core import PydanticCustomError

from ..core.exceptions import ConfigValidationError, ErrorCode
from .base import BaseSchema

DEFAULT_BETA_LADDER = [1e-1, 2.5e-2, 6.25e-3, 1.5625e-3]
DEFAULT_EPS_LADDER = [1e-1, 1e-2, 1e-3, 1e-4]
DEFAULT_MMS_LADDER = [1 / 40, 1 / 80, 1 / 160, 1 / 320, 1 / 640]


# ============================================================================
# Dominio y base
# ============================================================================

class DomainConfig(BaseSchema):
    lengths: List[float] = Field(..., min_length=1, max_length=2, description="Longitudes de la caja (1D o 2D)")

    @field_validator("lengths")
    @classmethod
    def validate_lengths(cls, v):
        if any(not length > 0 for length in v):
            raise ValueError("domain lengths must be positive")
        return v


class BasisConfig(BaseSchema):
    n_modes: Union[int, List[int]] = Field(16, description="Modos por eje")
    quadrature_factor: int = Field(3, ge=2, description="Nodos de cuadratura por modo")

    @field_validator("n_modes")
    @classmethod
    def validate_modes(cls, v):
        counts = [v] if isinstance(v, int) else v
        if not counts or any(n < 1 for n in counts):
            raise ValueError("n_modes must be positive")
        return v


# ============================================================================
# Grafo, no linealidad, forzamiento, datos iniciales
# ============================================================================

class DoubleObstacleConfig(BaseSchema):
    name: Literal["double_obstacle"] = "double_obstacle"
    lower: float = -1.0
    upper: float = 1.0

    @model_validator(mode="after")
    def validate_bounds(self):
        if not (self.lower <= 0.0 <= self.upper and self.lower < self.upper):
            raise ValueError("double obstacle needs lower <= 0 <= upper and lower < upper")
        return self


class PowerGraphConfig(BaseSchema):
    name: Literal["power"] = "power"
    exponent: int = Field(3, ge=1)

    @field_validator("exponent")
    @classmethod
    def validate_exponent(cls, v):
        if v % 2 == 0:
            raise ValueError("power graph exponent must be odd")
        return v


class LinearGraphConfig(BaseSchema):
    name: Literal["linear"] = "linear"
    slope: float = Field(1.0, ge=0.0)


class ZeroGraphConfig(BaseSchema):
    name: Literal["zero"] = "zero"


GraphConfig = Annotated[
    Union[DoubleObstacleConfig, PowerGraphConfig, LinearGraphConfig, ZeroGraphConfig],
    Field(discriminator="name"),
]


class NonlinearityConfig(BaseSchema):
    name: Literal["zero", "linear", "obstacle_well"] = "zero"
    slope: float = Field(1.0, description="Pendiente de g para 'linear'")


class ForcingConfig(BaseSchema):
    name: Literal["zero", "constant", "mode"] = "zero"
    value: float = Field(0.0, description="Valor de 'constant'")
    amplitude: float = Field(1.0, description="Amplitud de 'mode'")
    index: List[int] = Field(default_factory=lambda: [1], description="Multi-índice de 'mode'")
    frequency: float = Field(0.0, description="Frecuencia temporal de 'mode'")


class ProfileConfig(BaseSchema):
    kind: Literal["constant", "cosine", "tanh_front"] = "constant"
    value: float = 0.0
    amplitude: float = 1.0
    index: List[int] = Field(default_factory=lambda: [1])
    offset: float = 0.0
    center: float = 0.5
    width: float = Field(0.1, gt=0.0)
    axis: int = Field(0, ge=0, le=1)


class InitialConfig(BaseSchema):
    w0: ProfileConfig = Field(default_factory=ProfileConfig)
    v0: ProfileConfig = Field(default_factory=ProfileConfig)
    u0: ProfileConfig = Field(default_factory=ProfileConfig)


# ============================================================================
# Parámetros y solver
# ============================================================================

class ParamsConfig(BaseSchema):
    alpha: float = Field(1.0, gt=0.0)
    beta: float = 1.0
    eps: float = Field(1e-2, gt=0.0, le=1.0)
    t_final: float = Field(1.0, gt=0.0)
    regularize: bool = True

    @field_validator("beta")
    @classmethod
    def validate_beta(cls, v):
        if not v >= 0:
            raise PydanticCustomError("negative_beta", "beta must be ≥ 0")
        return v


class SolverSection(BaseSchema):
    dt: float = Field(1e-3, gt=0.0)
    scheme: Literal["imex_euler", "imex_cn"] = "imex_euler"
    newton_tol: float = Field(1e-12, gt=0.0)
    newton_max_iter: int = Field(50, ge=1)
    freeze_thermal: bool = False


# ============================================================================
# Barridos
# ============================================================================

class LadderConfig(BaseSchema):
    """Escalera explícita o geométrica (start, ratio, count)"""
    ladder: Optional[List[float]] = None
    start: Optional[float] = Field(None, gt=0.0)
    ratio: Optional[float] = Field(None, gt=0.0)
    count: Optional[int] = Field(None, ge=3)

    @model_validator(mode="after")
    def validate_ladder(self):
        geometric = (self.start, self.ratio, self.count)
        if self.ladder is not None and any(g is not None for g in geometric):
            raise ValueError("give either 'ladder' or 'start'/'ratio'/'count', not both")
        if any(g is not None for g in geometric) and not all(g is not None for g in geometric):
            raise ValueError("geometric ladder needs 'start', 'ratio' and 'count'")
        if self.ladder is not None and len(self.ladder) < 3:
            raise ValueError("a ladder needs at least 3 values")
        return self

    def values(self, default: Sequence[float]) -> List[float]:
        if self.ladder is not None:
            return list(self.ladder)
        if self.start is not None:
            return [self.start * self.ratio ** k for k in range(self.count)]
        return list(default)


class PerturbationConfig(BaseSchema):
    enabled: bool = True
    mode_position: int = Field(1, ge=0)
    components: List[Literal["f", "w", "v", "u"]] = Field(default_factory=lambda: ["f", "w", "v", "u"])
    violate_uniform_bound: bool = False


class BetaSweepConfig(LadderConfig):
    perturbation: PerturbationConfig = Field(default_factory=PerturbationConfig)
    gate_channels: List[Literal["stimaerr1", "stimaerr2"]] = Field(default_factory=lambda: ["stimaerr1"])


class EpsSweepConfig(LadderConfig):
    pass


class SweepsConfig(BaseSchema):
    beta: BetaSweepConfig = Field(default_factory=BetaSweepConfig)
    eps: EpsSweepConfig = Field(default_factory=EpsSweepConfig)
    enforce_gates: bool = True


class MMSConfig(LadderConfig):
    w: str = "cos(pi*x)*exp(-t)"
    u: str = "cos(pi*x)*(1 + t)"
    refine: Literal["dt", "n_modes"] = "dt"


class OutputConfig(BaseSchema):
    directory: Optional[str] = Field(None, description="Directorio de salida (por defecto PHASEFIELD_OUTPUT_DIR)")
    threads: int = Field(1, ge=1, le=256)


# ============================================================================
# Configuración completa
# ============================================================================

class RunConfig(BaseSchema):
    """Descripción declarativa de un experimento"""
    domain: DomainConfig
    basis: BasisConfig = Field(default_factory=BasisConfig)
    graph: GraphConfig = Field(default_factory=DoubleObstacleConfig)
    nonlinearity: NonlinearityConfig = Field(default_factory=NonlinearityConfig)
    forcing: ForcingConfig = Field(default_factory=ForcingConfig)
    initial: InitialConfig = Field(default_factory=InitialConfig)
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    solver: SolverSection = Field(default_factory=SolverSection)
    sweeps: SweepsConfig = Field(default_factory=SweepsConfig)
    mms: MMSConfig = Field(default_factory=MMSConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def validate_dimensions(self):
        dim = len(self.domain.lengths)
        modes = self.basis.n_modes
        if isinstance(modes, list) and len(modes) != dim:
            raise ValueError(f"basis.n_modes has {len(modes)} entries for a {dim}D domain")
        if self.forcing.name == "mode" and len(self.forcing.index) != dim:
            raise ValueError(f"forcing.index needs {dim} entries")
        for name in ("w0", "v0", "u0"):
            profile = getattr(self.initial, name)
            if profile.kind == "cosine" and len(profile.index) != dim:
                raise ValueError(f"initial.{name}.index needs {dim} entries")
            if profile.kind == "tanh_front" and profile.axis >= dim:
                raise ValueError(f"initial.{name}.axis out of range for a {dim}D domain")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


# ============================================================================
# Parseo con referencias de línea
# ============================================================================

_ERROR_CODES = {
    "missing": ErrorCode.MISSING_KEY,
    "extra_forbidden": ErrorCode.UNKNOWN_KEY,
    "union_tag_invalid": ErrorCode.UNKNOWN_GRAPH,
    "negative_beta": ErrorCode.NEGATIVE_BETA,
}


def _line_of(text: str, loc: Sequence[Any]) -> Optional[int]:
    """Línea (1-based) de la clave más profunda de ``loc`` que aparece en el texto"""
    pos, found = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        index = text.find(f'"{part}"', pos)
        if index < 0:
            break
        pos, found = index, index
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


def _clean_message(message: str) -> str:
    prefix = "Value error, "
    return message[len(prefix):] if message.startswith(prefix) else message


def parse_config(text: str) -> RunConfig:
    """Valida el texto JSON de una configuración"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError([{
            "code": ErrorCode.SYNTAX,
            "message": f"invalid JSON: {e.msg}",
            "location": [],
            "line": e.lineno,
        }])
    if not isinstance(data, dict):
        raise ConfigValidationError([{
            "code": ErrorCode.SYNTAX,
            "message": "configuration must be a JSON object",
            "location": [],
            "line": 1,
        }])
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        errors: List[Dict[str, Any]] = []
        for item in e.errors():
            loc = [part for part in item["loc"] if not (isinstance(part, str) and part in _UNION_TAGS)]
            errors.append({
                "code": _ERROR_CODES.get(item["type"], ErrorCode.INVALID_VALUE),
                "message": _clean_message(item["msg"]),
                "location": loc,
                "line": _line_of(text, loc),
            })
        raise ConfigValidationError(errors)


# Etiquetas del discriminador que pydantic inserta en ``loc``
_UNION_TAGS = {"double_obstacle", "power", "linear", "zero"}


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
