"""
Datos del Problema y Funcionales Físicos
========================================

Agrupa parámetros (α, β, ε, T), el grafo γ, la no linealidad suave g = G',
el forzamiento f (y la fuente opcional h de la ecuación de fase, solo para
soluciones manufacturadas) y los datos iniciales (w0, v0, u0).

Funcionales:

- energía libre  Ψ(θ, u) = ∫ −θ²/2 − θu + φ(u) + G(u) + |∇u|²/2
- entalpía       e = w_t + u
- flujo de calor q = −α∇w_t (tipo I), −β∇w (tipo II), suma de ambos (tipo III)
- desplazamiento térmico  w(t) = w0 + ∫_0^t θ
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy.integrate import cumulative_trapezoid

from ..core.exceptions import ErrorCode, PhaseFieldError, ShapeMismatchError
from .monotone_graph import MonotoneGraph, ZeroGraph
from .spectral_basis import BoxDomain, CoeffVector, GridFunction, SpectralBasis

logger = logging.getLogger(__name__)

Coordinates = Tuple[np.ndarray, ...]
SpaceFunction = Callable[[Coordinates], np.ndarray]
SpaceTimeFunction = Callable[[Coordinates, float], np.ndarray]
Profile = Union[SpaceFunction, np.ndarray]


# ============================================================================
# Parámetros
# ============================================================================

@dataclass(frozen=True)
class ProblemParams:
    """Parámetros del modelo; beta = 0 selecciona el problema límite (tipo I)"""
    alpha: float = 1.0
    beta: float = 1.0
    eps: float = 1e-2
    t_final: float = 1.0
    # Con un grafo univaluado, regularize=False usa γ en lugar de γ_ε
    regularize: bool = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise PhaseFieldError(f"alpha must be > 0, got {self.alpha}", code=ErrorCode.INVALID_VALUE)
        if not self.beta >= 0:
            raise PhaseFieldError("beta must be ≥ 0", details={"beta": self.beta}, code=ErrorCode.NEGATIVE_BETA)
        if not 0 < self.eps <= 1:
            raise PhaseFieldError(f"eps must be in (0, 1], got {self.eps}", code=ErrorCode.INVALID_VALUE)
        if not self.t_final > 0:
            raise PhaseFieldError(f"t_final must be > 0, got {self.t_final}", code=ErrorCode.INVALID_VALUE)


# ============================================================================
# No linealidad suave g = G'
# ============================================================================

@dataclass(frozen=True)
class SmoothNonlinearity:
    """g Lipschitz con antiderivada G dada analíticamente"""
    name: str
    g: Callable[[np.ndarray], np.ndarray]
    G: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    symbolic: Optional[Callable[[sp.Symbol], sp.Expr]] = field(default=None, repr=False)


def zero_nonlinearity() -> SmoothNonlinearity:
    return SmoothNonlinearity(
        name="zero",
        g=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        G=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        dg=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        lipschitz=0.0,
        symbolic=lambda s: sp.Integer(0),
    )


def linear_nonlinearity(slope: float = 1.0) -> SmoothNonlinearity:
    """g(s) = k s, G(s) = k s²/2"""
    k = float(slope)
    return SmoothNonlinearity(
        name="linear",
        g=lambda s: k * np.asarray(s, dtype=float),
        G=lambda s: 0.5 * k * np.asarray(s, dtype=float) ** 2,
        dg=lambda s: np.full_like(np.asarray(s, dtype=float), k),
        lipschitz=abs(k),
        symbolic=lambda s: sp.nsimplify(k) * s,
    )


def obstacle_well() -> SmoothNonlinearity:
    """G(s) = 1 − s², g(s) = −2s: con el doble obstáculo, pozos en ±1"""
    return SmoothNonlinearity(
        name="obstacle_well",
        g=lambda s: -2.0 * np.asarray(s, dtype=float),
        G=lambda s: 1.0 - np.asarray(s, dtype=float) ** 2,
        dg=lambda s: np.full_like(np.asarray(s, dtype=float), -2.0),
        lipschitz=2.0,
        symbolic=lambda s: -2 * s,
    )


# ============================================================================
# Perfiles espaciales (datos iniciales, perturbaciones)
# ============================================================================

def constant_profile(value: float) -> SpaceFunction:
    def profile(coords: Coordinates) -> np.ndarray:
        return np.full(np.shape(coords[0]), float(value))
    return profile


def cosine_profile(
    amplitude: float,
    index: Sequence[int],
    lengths: Sequence[float],
    offset: float = 0.0,
) -> SpaceFunction:
    """offset + amplitude Π_d cos(k_d π x_d / L_d)"""
    index = tuple(int(k) for k in index)
    lengths = tuple(float(length) for length in lengths)

    def profile(coords: Coordinates) -> np.ndarray:
        out = np.full(np.shape(coords[0]), float(amplitude))
        for x, k, length in zip(coords, index, lengths):
            out = out * np.cos(k * np.pi * x / length)
        return offset + out
    return profile


def tanh_front(center: float, width: float, amplitude: float = 1.0, axis: int = 0) -> SpaceFunction:
    """amplitude · tanh((x_axis − center)/width)"""
    if width <= 0:
        raise PhaseFieldError(f"tanh front width must be > 0, got {width}", code=ErrorCode.INVALID_VALUE)

    def profile(coords: Coordinates) -> np.ndarray:
        return amplitude * np.tanh((coords[axis] - center) / width)
    return profile


def unit_mode_profile(basis: SpectralBasis, position: int = 1) -> SpaceFunction:
    """Autofunción v_i (norma L² unitaria) como perfil de perturbación"""
    position = min(position, basis.size - 1)
    c = np.zeros(basis.size)
    c[position] = 1.0
    return lambda coords: basis.evaluate(c, coords)


# ============================================================================
# Forzamiento
# ============================================================================

@dataclass(frozen=True)
class ForcingTerm:
    """f(x, t) de la ecuación de balance y fuente h(x, t) opcional de la de fase"""
    name: str = "zero"
    f: Optional[SpaceTimeFunction] = field(default=None, repr=False)
    h: Optional[SpaceTimeFunction] = field(default=None, repr=False)

    def project_f(self, basis: SpectralBasis, t: float) -> CoeffVector:
        if self.f is None:
            return np.zeros(basis.size)
        return basis.project(np.broadcast_to(self.f(basis.coordinates, t), basis.grid_shape))

    def project_h(self, basis: SpectralBasis, t: float) -> CoeffVector:
        if self.h is None:
            return np.zeros(basis.size)
        return basis.project(np.broadcast_to(self.h(basis.coordinates, t), basis.grid_shape))

    def perturbed(self, delta: Optional[SpaceTimeFunction], scale: float) -> "ForcingTerm":
        """f_β = f + scale · δf"""
        if delta is None or scale == 0.0:
            return self
        base = self.f

        def combined(coords: Coordinates, t: float) -> np.ndarray:
            out = scale * np.asarray(delta(coords, t), dtype=float)
            if base is not None:
                out = out + base(coords, t)
            return out
        return dataclasses.replace(self, name=f"{self.name}+delta", f=combined)


def zero_forcing() -> ForcingTerm:
    return ForcingTerm(name="zero")


def constant_forcing(value: float) -> ForcingTerm:
    return ForcingTerm(name="constant", f=lambda coords, t: np.full(np.shape(coords[0]), float(value)))


def mode_forcing(amplitude: float, index: Sequence[int], lengths: Sequence[float], frequency: float = 0.0) -> ForcingTerm:
    """amplitude · cos(ω t) · Π cos(k_d π x_d / L_d)"""
    spatial = cosine_profile(amplitude, index, lengths)
    return ForcingTerm(name="mode", f=lambda coords, t: spatial(coords) * np.cos(frequency * t))


# ============================================================================
# Datos iniciales y problema completo
# ============================================================================

@dataclass(frozen=True)
class InitialData:
    """w0, v0 = w_t(0), u0 como perfiles cerrados o valores en la malla"""
    w0: Profile = field(default_factory=lambda: constant_profile(0.0))
    v0: Profile = field(default_factory=lambda: constant_profile(0.0))
    u0: Profile = field(default_factory=lambda: constant_profile(0.0))

    def grid(self, name: str, basis: SpectralBasis) -> GridFunction:
        profile = getattr(self, name)
        if callable(profile):
            values = np.broadcast_to(np.asarray(profile(basis.coordinates), dtype=float), basis.grid_shape)
        else:
            values = basis.check_grid(profile)
        return np.array(values, dtype=float)

    def perturbed(
        self,
        dw: Optional[SpaceFunction],
        dv: Optional[SpaceFunction],
        du: Optional[SpaceFunction],
        scale: float,
    ) -> "InitialData":
        """(w0, v0, u0) + scale · (δw, δv, δu)"""
        def shift(base: Profile, delta: Optional[SpaceFunction]) -> Profile:
            if delta is None or scale == 0.0:
                return base

            def combined(coords: Coordinates) -> np.ndarray:
                values = base(coords) if callable(base) else base
                return np.asarray(values, dtype=float) + scale * np.asarray(delta(coords), dtype=float)
            return combined

        return InitialData(w0=shift(self.w0, dw), v0=shift(self.v0, dv), u0=shift(self.u0, du))


@dataclass(frozen=True)
class ProblemData:
    """Datos completos del problema P_αβ (o P_α si beta = 0)"""
    params: ProblemParams
    domain: BoxDomain
    graph: MonotoneGraph = field(default_factory=ZeroGraph)
    nl: SmoothNonlinearity = field(default_factory=zero_nonlinearity)
    forcing: ForcingTerm = field(default_factory=zero_forcing)
    init: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if not self.params.regularize and not self.graph.is_single_valued:
            raise PhaseFieldError(
                f"regularize=False requires a single-valued graph, got '{self.graph.name}'",
                code=ErrorCode.INVALID_VALUE,
            )

    def with_params(self, **changes) -> "ProblemData":
        return dataclasses.replace(self, params=dataclasses.replace(self.params, **changes))

    def phase_nonlinearity(self, u: np.ndarray) -> np.ndarray:
        """γ_ε(u) + g(u) (o γ(u) + g(u) sin regularizar)"""
        return self.xi(u) + self.nl.g(u)

    def phase_nonlinearity_derivative(self, u: np.ndarray) -> np.ndarray:
        if self.params.regularize:
            d_gamma = self.graph.yosida_derivative(self.params.eps, u)
        else:
            d_gamma = self.graph.derivative(u)
        return np.asarray(d_gamma, dtype=float) + self.nl.dg(u)

    def xi(self, u: np.ndarray) -> np.ndarray:
        """Selección ξ: γ_ε(u), o γ(u) sin regularizar"""
        if self.params.regularize:
            return np.asarray(self.graph.yosida(self.params.eps, u), dtype=float)
        return np.asarray(self.graph.value(u), dtype=float)

    def potential(self, u: np.ndarray) -> np.ndarray:
        """φ_ε(u) en el sistema regularizado, φ(u) si no"""
        if self.params.regularize:
            return np.asarray(self.graph.moreau(self.params.eps, u), dtype=float)
        return np.asarray(self.graph.potential(u), dtype=float)


# ============================================================================
# Funcionales
# ============================================================================

def free_energy(
    theta: GridFunction,
    u: GridFunction,
    basis: SpectralBasis,
    potential: Callable[[np.ndarray], np.ndarray],
    G: Callable[[np.ndarray], np.ndarray],
) -> float:
    """
    Energía libre total Ψ(θ, u); el término de gradiente se calcula
    espectralmente. Devuelve +∞ si φ(u) es infinito en algún nodo.
    """
    theta = basis.check_grid(theta)
    u = basis.check_grid(u)
    phi = np.asarray(potential(u), dtype=float)
    if not np.all(np.isfinite(phi)):
        return float("inf")
    bulk = -0.5 * theta ** 2 - theta * u + phi + np.asarray(G(u), dtype=float)
    _, grad_u, _ = basis.norms(u)
    return basis.integrate(bulk) + 0.5 * grad_u ** 2


def enthalpy(w_t: GridFunction, u: GridFunction) -> GridFunction:
    """e = θ + u = w_t + u"""
    w_t = np.asarray(w_t, dtype=float)
    u = np.asarray(u, dtype=float)
    if w_t.shape != u.shape:
        raise ShapeMismatchError(f"enthalpy operands differ in shape: {w_t.shape} vs {u.shape}")
    return w_t + u


class HeatFluxLaw(str, Enum):
    TYPE_I = "typeI"
    TYPE_II = "typeII"
    TYPE_III = "typeIII"


def heat_flux(
    law: Union[HeatFluxLaw, str],
    w: CoeffVector,
    w_t: CoeffVector,
    alpha: float,
    beta: float,
    basis: SpectralBasis,
) -> np.ndarray:
    """Flujo q en la malla, forma (dim, *grid_shape)"""
    law = HeatFluxLaw(law)
    if law is HeatFluxLaw.TYPE_I:
        return -alpha * basis.gradient(w_t)
    if law is HeatFluxLaw.TYPE_II:
        return -beta * basis.gradient(w)
    return heat_flux(HeatFluxLaw.TYPE_I, w, w_t, alpha, beta, basis) + heat_flux(
        HeatFluxLaw.TYPE_II, w, w_t, alpha, beta, basis
    )


def thermal_displacement(theta_history: np.ndarray, w0: np.ndarray, dt: float) -> np.ndarray:
    """w(t_k) = w0 + ∫_0^{t_k} θ por la regla del trapecio (malla uniforme)"""
    theta_history = np.asarray(theta_history, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    if theta_history.shape[1:] != w0.shape:
        raise ShapeMismatchError(
            f"theta history entries have shape {theta_history.shape[1:]}, w0 has {w0.shape}"
        )
    return w0 + cumulative_trapezoid(theta_history, dx=dt, axis=0, initial=0.0)
