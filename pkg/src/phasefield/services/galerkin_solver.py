"""
Solver de Faedo–Galerkin
========================

Sistema semidiscreto en la base de autofunciones (Λ = diag(λ_i)):

    w' = v
    v' = −αΛv − βΛw − u' + f̂
    u' = −Λu − Π_n[γ_ε(u) + g(u)] + v + ĥ

Esquemas (orden fijo de subpasos: ecuación de u, luego v, luego w):

``imex_euler``
    u^{n+1} implícito (Newton) con v^n retrasado; después
    (1 + dtαλ + dt²βλ) v^{n+1} = v^n − dtβλw^n − (u^{n+1} − u^n) + dt f̂^{n+1}
    y w^{n+1} = w^n + dt v^{n+1}.

``imex_cn``
    pesos trapezoidales en las tres ecuaciones. La actualización lineal de
    v/w se despeja como v^{n+1} = P − D⁻¹(u^{n+1} − u^n) y se sustituye en
    la ecuación de u, de modo que el paso acoplado se resuelve con un solo
    Newton sobre u^{n+1}.

β = 0 es el problema límite (ley de tipo I) por el mismo camino de código.
"""
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..core.exceptions import (
    DivergenceError,
    ErrorCode,
    NewtonConvergenceError,
    PhaseFieldError,
    StepError,
    TrajectoryError,
)
from .problem import InitialData, ProblemData
from .spectral_basis import (
    DEFAULT_QUADRATURE_FACTOR,
    BoxDomain,
    CoeffVector,
    GridFunction,
    SpectralBasis,
    build_basis,
)

logger = logging.getLogger(__name__)

MAX_STEPS = 5_000_000


class TimeScheme(str, Enum):
    IMEX_EULER = "imex_euler"
    IMEX_CN = "imex_cn"


@dataclass(frozen=True)
class SolverConfig:
    """Discretización: modos, paso de tiempo y Newton"""
    n_modes: Union[int, Tuple[int, ...]] = 16
    dt: float = 1e-3
    scheme: TimeScheme = TimeScheme.IMEX_EULER
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    quadrature_factor: int = DEFAULT_QUADRATURE_FACTOR
    # Reducción de flujo gradiente: w_t ≡ 0, solo evoluciona u
    freeze_thermal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", TimeScheme(self.scheme))
        if not self.dt > 0:
            raise PhaseFieldError(f"dt must be > 0, got {self.dt}", code=ErrorCode.INVALID_VALUE)
        if not self.newton_tol > 0:
            raise PhaseFieldError("newton_tol must be > 0", code=ErrorCode.INVALID_VALUE)
        if self.newton_max_iter < 1:
            raise PhaseFieldError("newton_max_iter must be >= 1", code=ErrorCode.INVALID_VALUE)


@dataclass(frozen=True)
class State:
    """Coeficientes de (w, v = w_t, u) en el instante t"""
    w: CoeffVector
    v: CoeffVector
    u: CoeffVector
    t: float = 0.0

    def __post_init__(self):
        shapes = {np.shape(self.w), np.shape(self.v), np.shape(self.u)}
        if len(shapes) != 1:
            raise PhaseFieldError(f"state components differ in length: {shapes}", code=ErrorCode.SHAPE_MISMATCH)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.u)))


@dataclass(frozen=True)
class Trajectory:
    """Sucesión temporal de estados con paso uniforme. Inmutable."""
    times: np.ndarray
    w: np.ndarray
    v: np.ndarray
    u: np.ndarray
    dt: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise TrajectoryError("trajectory needs at least one state")
        for name in ("w", "v", "u"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape[0] != len(times):
                raise TrajectoryError(f"component {name} has {arr.shape[0]} rows for {len(times)} times")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        times = times.copy()
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        if len(times) > 1:
            spacing = np.diff(times)
            if np.any(spacing <= 0):
                raise TrajectoryError("trajectory times must be strictly increasing")
            if np.max(np.abs(spacing - self.dt)) > 1e-12 * max(1.0, float(times[-1])):
                raise TrajectoryError("trajectory spacing differs from dt")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_coefficients(self) -> int:
        return int(self.w.shape[1])

    def state(self, k: int) -> State:
        return State(w=self.w[k], v=self.v[k], u=self.u[k], t=float(self.times[k]))

    @property
    def states(self) -> List[State]:
        return [self.state(k) for k in range(len(self))]

    @property
    def final(self) -> State:
        return self.state(len(self) - 1)

    def slice(self, start: int, stop: Optional[int] = None) -> "Trajectory":
        return Trajectory(
            times=self.times[start:stop],
            w=self.w[start:stop],
            v=self.v[start:stop],
            u=self.u[start:stop],
            dt=self.dt,
            metadata=dict(self.metadata),
        )


@lru_cache(maxsize=32)
def _cached_basis(domain: BoxDomain, n_modes: Tuple[int, ...], quadrature_factor: int) -> SpectralBasis:
    return build_basis(domain, n_modes, quadrature_factor)


def basis_for(domain: BoxDomain, cfg: SolverConfig) -> SpectralBasis:
    """Base compartida (inmutable) para un dominio y una configuración"""
    n_modes = cfg.n_modes
    if isinstance(n_modes, (int, np.integer)):
        n_modes = (int(n_modes),) * domain.dim
    return _cached_basis(domain, tuple(int(n) for n in n_modes), cfg.quadrature_factor)


def project_initial_data(init: InitialData, basis: SpectralBasis) -> State:
    """Proyecciones P_n de (w0, v0, u0) con t = 0"""
    return State(
        w=basis.project(init.grid("w0", basis)),
        v=basis.project(init.grid("v0", basis)),
        u=basis.project(init.grid("u0", basis)),
        t=0.0,
    )


class GalerkinSolver:
    """Integrador temporal del sistema de Galerkin para unos datos fijos"""

    def __init__(self, pd: ProblemData, cfg: SolverConfig, basis: Optional[SpectralBasis] = None):
        self.pd = pd
        self.cfg = cfg
        self.basis = basis if basis is not None else basis_for(pd.domain, cfg)
        self.lam = self.basis.eigenvalues
        self.newton_iterations: List[int] = []
        if not pd.graph.is_single_valued and cfg.dt > pd.params.eps / 2:
            logger.warning(
                f"⚠️ dt={cfg.dt:g} mayor que eps/2={pd.params.eps / 2:g} con el grafo {pd.graph.name}: "
                "Newton puede necesitar más iteraciones"
            )

    # ------------------------------------------------------------------
    # Piezas del sistema
    # ------------------------------------------------------------------
    def nonlinear_term(self, u: CoeffVector) -> CoeffVector:
        """Π_n[γ_ε(u) + g(u)]"""
        return self.basis.project(self.pd.phase_nonlinearity(self.basis.to_grid(u)))

    def nonlinear_jacobian(self, u: CoeffVector) -> np.ndarray:
        """M_ij = ∫ (γ_ε' + g')(u) v_i v_j"""
        d = self.pd.phase_nonlinearity_derivative(self.basis.to_grid(u)).ravel()
        d = d * self.basis.quadrature_weights.ravel()
        B = self.basis.synthesis_matrix
        return (B * d) @ B.T

    def _newton(
        self,
        residual_fn: Callable[[np.ndarray], np.ndarray],
        linear_diag: np.ndarray,
        weight: float,
        u_start: np.ndarray,
    ) -> np.ndarray:
        """Newton para F(u) = 0 con jacobiano diag(linear_diag) + weight·M(u)"""
        tol = self.cfg.newton_tol * (1.0 + np.linalg.norm(u_start))
        roundoff = 16.0 * np.finfo(float).eps
        u = u_start.copy()
        residual_norm = np.inf
        for iteration in range(self.cfg.newton_max_iter + 1):
            residual = residual_fn(u)
            if not np.all(np.isfinite(residual)):
                raise DivergenceError("non-finite Newton residual", details={"iteration": iteration})
            residual_norm = float(np.linalg.norm(residual))
            if residual_norm <= tol:
                self.newton_iterations.append(iteration)
                return u
            if iteration == self.cfg.newton_max_iter:
                break
            jac = weight * self.nonlinear_jacobian(u)
            jac[np.diag_indices_from(jac)] += linear_diag
            delta = linalg.solve(jac, residual, assume_a="sym", check_finite=False)
            u = u - delta
            if np.linalg.norm(delta) <= roundoff * (1.0 + np.linalg.norm(u)):
                self.newton_iterations.append(iteration + 1)
                return u
        raise NewtonConvergenceError(self.cfg.newton_max_iter, residual_norm)

    # ------------------------------------------------------------------
    # Pasos
    # ------------------------------------------------------------------
    def step(self, state: State) -> State:
        if self.cfg.scheme is TimeScheme.IMEX_CN:
            new = self._step_cn(state)
        else:
            new = self._step_euler(state)
        if not new.is_finite():
            raise DivergenceError("non-finite state after step", details={"t": new.t})
        return new

    def _step_euler(self, state: State) -> State:
        dt, lam = self.cfg.dt, self.lam
        alpha, beta = self.pd.params.alpha, self.pd.params.beta
        t1 = state.t + dt
        u_n, v_n, w_n = state.u, state.v, state.w
        h1 = self.pd.forcing.project_h(self.basis, t1)
        v_lag = np.zeros_like(v_n) if self.cfg.freeze_thermal else v_n
        rhs = u_n + dt * (v_lag + h1)

        def residual(u):
            return u + dt * (lam * u + self.nonlinear_term(u)) - rhs

        u1 = self._newton(residual, 1.0 + dt * lam, dt, u_n)
        if self.cfg.freeze_thermal:
            return State(w=w_n.copy(), v=np.zeros_like(v_n), u=u1, t=t1)

        f1 = self.pd.forcing.project_f(self.basis, t1)
        denom = 1.0 + dt * alpha * lam + dt * dt * beta * lam
        v1 = (v_n - dt * beta * lam * w_n - (u1 - u_n) + dt * f1) / denom
        w1 = w_n + dt * v1
        return State(w=w1, v=v1, u=u1, t=t1)

    def _step_cn(self, state: State) -> State:
        dt, lam = self.cfg.dt, self.lam
        alpha, beta = self.pd.params.alpha, self.pd.params.beta
        t0, t1 = state.t, state.t + dt
        u_n, v_n, w_n = state.u, state.v, state.w
        forcing = self.pd.forcing
        h_half = 0.5 * (forcing.project_h(self.basis, t0) + forcing.project_h(self.basis, t1))
        explicit = lam * u_n + self.nonlinear_term(u_n)

        if self.cfg.freeze_thermal:
            def residual(u):
                return u - u_n + 0.5 * dt * (lam * u + self.nonlinear_term(u) + explicit) - dt * h_half

            u1 = self._newton(residual, 1.0 + 0.5 * dt * lam, 0.5 * dt, u_n)
            return State(w=w_n.copy(), v=np.zeros_like(v_n), u=u1, t=t1)

        f_half = 0.5 * (forcing.project_f(self.basis, t0) + forcing.project_f(self.basis, t1))
        stiff = 0.5 * dt * alpha * lam + 0.25 * dt * dt * beta * lam
        D = 1.0 + stiff
        P = (v_n * (1.0 - stiff) - dt * beta * lam * w_n + dt * f_half) / D

        def residual(u):
            v1 = P - (u - u_n) / D
            return u - u_n + 0.5 * dt * (lam * u + self.nonlinear_term(u) - v1) + 0.5 * dt * (explicit - v_n) - dt * h_half

        u1 = self._newton(residual, 1.0 + 0.5 * dt * (lam + 1.0 / D), 0.5 * dt, u_n)
        v1 = P - (u1 - u_n) / D
        w1 = w_n + 0.5 * dt * (v_n + v1)
        return State(w=w1, v=v1, u=u1, t=t1)

    # ------------------------------------------------------------------
    # Integración completa
    # ------------------------------------------------------------------
    def solve(self, initial: Optional[State] = None) -> Trajectory:
        params, dt = self.pd.params, self.cfg.dt
        n_steps = int(round(params.t_final / dt))
        if n_steps < 1:
            raise PhaseFieldError(f"t_final={params.t_final} shorter than dt={dt}", code=ErrorCode.INVALID_VALUE)
        if n_steps > MAX_STEPS:
            raise PhaseFieldError(f"{n_steps} steps exceed the limit of {MAX_STEPS}", code=ErrorCode.INVALID_VALUE)
        if abs(n_steps * dt - params.t_final) > 1e-9 * params.t_final:
            logger.warning(f"t_final={params.t_final} no es múltiplo de dt={dt}; se integra hasta {n_steps * dt}")

        state = initial if initial is not None else project_initial_data(self.pd.init, self.basis)
        size = self.basis.size
        W = np.empty((n_steps + 1, size))
        V = np.empty((n_steps + 1, size))
        U = np.empty((n_steps + 1, size))
        W[0], V[0], U[0] = state.w, state.v, state.u
        times = np.arange(n_steps + 1) * dt

        logger.info(
            f"Iniciando integración: esquema={self.cfg.scheme.value}, modos={self.basis.n_modes}, "
            f"dt={dt}, pasos={n_steps}, alpha={params.alpha}, beta={params.beta}, eps={params.eps}"
        )
        start = time.perf_counter()
        self.newton_iterations = []
        for k in range(n_steps):
            try:
                state = self.step(dataclasses.replace(state, t=float(times[k])))
            except PhaseFieldError as e:
                logger.error(f"Paso fallido en t={times[k]:.6g}: {e.message}")
                raise StepError(float(times[k]), e) from e
            W[k + 1], V[k + 1], U[k + 1] = state.w, state.v, state.u

        elapsed = time.perf_counter() - start
        iterations = np.asarray(self.newton_iterations or [0])
        logger.info(
            f"Integración completada en {elapsed:.3f}s "
            f"(Newton: media {iterations.mean():.2f}, máx {iterations.max()} iteraciones)"
        )
        metadata = {
            "scheme": self.cfg.scheme.value,
            "n_modes": list(self.basis.n_modes),
            "dt": dt,
            "n_steps": n_steps,
            "alpha": params.alpha,
            "beta": params.beta,
            "eps": params.eps,
            "t_final": params.t_final,
            "regularize": params.regularize,
            "freeze_thermal": self.cfg.freeze_thermal,
            "graph": self.pd.graph.describe(),
            "nonlinearity": self.pd.nl.name,
            "forcing": self.pd.forcing.name,
            "newton_iterations_max": int(iterations.max()),
        }
        return Trajectory(times=times, w=W, v=V, u=U, dt=dt, metadata=metadata)


# ============================================================================
# Interfaz funcional
# ============================================================================

def step(state: State, pd: ProblemData, cfg: SolverConfig, basis: Optional[SpectralBasis] = None) -> State:
    """Avanza un paso dt desde ``state``"""
    return GalerkinSolver(pd, cfg, basis).step(state)


def solve(pd: ProblemData, cfg: SolverConfig, basis: Optional[SpectralBasis] = None) -> Trajectory:
    """Trayectoria completa de t = 0 a t_final"""
    return GalerkinSolver(pd, cfg, basis).solve()


def reconstruct_xi(state: State, pd: ProblemData, basis: SpectralBasis) -> GridFunction:
    """ξ ≈ γ_ε(u) en la malla"""
    return pd.xi(basis.to_grid(state.u))


@dataclass(frozen=True)
class Residuals:
    """Residuos L²(Ω) de las ecuaciones fuertes en los nodos interiores"""
    times: np.ndarray
    balance: np.ndarray
    phase: np.ndarray

    def max(self) -> Tuple[float, float]:
        return float(np.max(self.balance)), float(np.max(self.phase))


def residuals(traj: Trajectory, pd: ProblemData, basis: SpectralBasis) -> Residuals:
    """
    Residuos de w_tt − αΔw_t − βΔw + u_t = f y u_t − Δu + ξ + g(u) − w_t = h
    con derivadas espaciales espectrales y diferencias centradas en tiempo.
    Se miden en V_n (proyección de f y h).
    """
    if len(traj) < 3:
        raise TrajectoryError(f"residuals need at least 3 states, got {len(traj)}")
    if traj.n_coefficients != basis.size:
        raise TrajectoryError("trajectory and basis differ in size")
    dt, lam = traj.dt, basis.eigenvalues
    alpha, beta = pd.params.alpha, pd.params.beta
    W, U = traj.w, traj.u
    w_t = (W[2:] - W[:-2]) / (2.0 * dt)
    w_tt = (W[2:] - 2.0 * W[1:-1] + W[:-2]) / (dt * dt)
    u_t = (U[2:] - U[:-2]) / (2.0 * dt)
    times = traj.times[1:-1]

    balance = np.empty(len(times))
    phase = np.empty(len(times))
    for j, t in enumerate(times):
        u = U[j + 1]
        f = pd.forcing.project_f(basis, float(t))
        h = pd.forcing.project_h(basis, float(t))
        nonlinear = basis.project(pd.phase_nonlinearity(basis.to_grid(u)))
        r_a = w_tt[j] + alpha * lam * w_t[j] + beta * lam * W[j + 1] + u_t[j] - f
        r_b = u_t[j] + lam * u + nonlinear - w_t[j] - h
        balance[j] = np.linalg.norm(r_a)
        phase[j] = np.linalg.norm(r_b)
    return Residuals(times=times, balance=balance, phase=phase)
