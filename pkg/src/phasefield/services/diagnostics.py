"""
Diagnósticos
============

Normas, funcionales y monitores de las estimaciones a priori sobre
trayectorias discretas.

Convenciones en tiempo (fijas para que los números sean reproducibles):

- L²(0,T; X): regla del trapecio sobre ‖·‖_X² en los nodos
- L∞(0,T; X): máximo sobre los nodos
- ∂_t: diferencias hacia delante; su L²(0,T; X) es dt Σ ‖D_k‖_X²
- sup_Q: máximo sobre nodos de tiempo y de cuadratura

Normas espaciales en la base de autofunciones (c = coeficientes):

    ‖·‖_H² = Σ c²     ‖·‖_V² = Σ (1 + λ) c²     ‖·‖_W² = Σ (1 + λ²) c²
    ‖·‖_V′² = Σ c² / (1 + λ)
"""
import logging
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from ..core.exceptions import ShapeMismatchError, TrajectoryError
from ..schemas.reports import MonitorReport
from .galerkin_solver import State, Trajectory
from .problem import ProblemData, free_energy
from .spectral_basis import SpectralBasis

logger = logging.getLogger(__name__)

# ============================================================================
# Registro de canales
# ============================================================================

# Estimación a priori uniforme en β y ε
ESTIMATE_1 = (
    "u_Linf_H",
    "u_L2_V",
    "v_L2_Q",
    "sqrt_alpha_grad_w_Linf_H",
)
# Estimación de energía (uniforme en ε)
ENERGY = (
    "v_Linf_H",
    "sqrt_beta_grad_w_Linf_H",
    "ut_L2_Q",
    "moreau_energy_Linf",
)
# Cotas L∞ de w_t y ξ, y exceso sobre D(γ)
LINF = (
    "v_Linf_Q",
    "xi_Linf_Q",
    "overshoot_Linf_Q",
)
FUNCTIONALS = (
    "free_energy_initial",
    "free_energy_final",
    "free_energy_max_increase",
    "enthalpy_balance_residual",
)
CHANNEL_REGISTRY = ESTIMATE_1 + ENERGY + LINF + FUNCTIONALS
ESTIMATE_GROUPS = {
    "estimate_1": ESTIMATE_1,
    "energy": ENERGY,
    "linf": LINF,
}

STIMAERR1 = ("w_H1_L2", "w_Linf_H1", "u_Linf_L2", "u_L2_H1")
STIMAERR2 = ("w_W1inf_H1", "w_H1_H2", "u_H1_L2", "u_Linf_H1", "u_L2_H2")
DIFFERENCE_REGISTRY = STIMAERR1 + ("stimaerr1",) + STIMAERR2 + ("stimaerr2",)


# ============================================================================
# Convolución en tiempo
# ============================================================================

def convolve_time(a: np.ndarray, b: Union[np.ndarray, float], dt: float) -> np.ndarray:
    """
    (a ∗ b)(t_k) = ∫_0^{t_k} a(s) b(t_k − s) ds por la regla del trapecio.

    Args:
        a: Serie temporal en una malla uniforme
        b: Serie en la misma malla, o un núcleo constante (1 ∗ a es la
           integral acumulada)
        dt: Paso de la malla

    Returns:
        np.ndarray: serie con (a ∗ b)(0) = 0
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ShapeMismatchError(f"time series must be one-dimensional, got shape {a.shape}")
    if not dt > 0:
        raise ShapeMismatchError(f"time step must be > 0, got {dt}")
    if np.isscalar(b) or np.ndim(b) == 0:
        b = np.full_like(a, float(b))
    b = np.asarray(b, dtype=float)
    if b.shape != a.shape:
        raise ShapeMismatchError(
            f"time series live on different grids: {a.shape} vs {b.shape}",
            details={"a": list(a.shape), "b": list(b.shape)},
        )
    full = np.convolve(a, b)[: len(a)]
    return dt * (full - 0.5 * a[0] * b - 0.5 * a * b[0])


# ============================================================================
# Utilidades de normas en tiempo
# ============================================================================

def _l2_time(squared: np.ndarray, dt: float) -> float:
    if len(squared) < 2:
        return 0.0
    return float(np.sqrt(trapezoid(squared, dx=dt)))


def _forward_difference(series: np.ndarray, dt: float) -> np.ndarray:
    if len(series) < 2:
        return np.zeros((0,) + series.shape[1:])
    return np.diff(series, axis=0) / dt


def _weighted_sq(coeffs: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Σ_i weight_i c_i² por fila"""
    return np.sum(weight * coeffs * coeffs, axis=-1)


def _check_trajectory(traj: Trajectory, basis: SpectralBasis) -> None:
    if traj.n_coefficients != basis.size:
        raise TrajectoryError(
            f"trajectory has {traj.n_coefficients} coefficients, basis has {basis.size}",
            details={"trajectory": traj.n_coefficients, "basis": basis.size},
        )


# ============================================================================
# Monitor
# ============================================================================

def monitor(traj: Trajectory, pd: ProblemData, basis: SpectralBasis) -> MonitorReport:
    """Rellena todos los canales del registro para una trayectoria completa"""
    _check_trajectory(traj, basis)
    dt, lam = traj.dt, basis.eigenvalues
    alpha, beta = pd.params.alpha, pd.params.beta
    W, V, U = traj.w, traj.v, traj.u
    one = np.ones_like(lam)

    u_H = np.sqrt(_weighted_sq(U, one))
    grad_w = np.sqrt(_weighted_sq(W, lam))
    v_H = np.sqrt(_weighted_sq(V, one))
    ut = _forward_difference(U, dt)

    channels: Dict[str, float] = {
        "u_Linf_H": float(np.max(u_H)),
        "u_L2_V": _l2_time(_weighted_sq(U, 1.0 + lam), dt),
        "v_L2_Q": _l2_time(v_H ** 2, dt),
        "sqrt_alpha_grad_w_Linf_H": float(np.sqrt(alpha) * np.max(grad_w)),
        "v_Linf_H": float(np.max(v_H)),
        "sqrt_beta_grad_w_Linf_H": float(np.sqrt(beta) * np.max(grad_w)),
        "ut_L2_Q": float(np.sqrt(dt * np.sum(_weighted_sq(ut, one)))),
    }

    lower = getattr(pd.graph, "lower", -np.inf)
    upper = getattr(pd.graph, "upper", np.inf)
    moreau_sup = v_sup = xi_sup = overshoot_sup = 0.0
    energy = np.empty(len(traj))
    for k in range(len(traj)):
        u_grid = basis.to_grid(U[k])
        v_grid = basis.to_grid(V[k])
        moreau_sup = max(moreau_sup, basis.integrate(pd.potential(u_grid)))
        v_sup = max(v_sup, float(np.max(np.abs(v_grid))))
        xi_sup = max(xi_sup, float(np.max(np.abs(pd.xi(u_grid)))))
        excess = np.maximum(np.maximum(u_grid - upper, lower - u_grid), 0.0)
        overshoot_sup = max(overshoot_sup, float(np.max(excess)))
        energy[k] = free_energy(v_grid, u_grid, basis, pd.potential, pd.nl.G)

    channels["moreau_energy_Linf"] = moreau_sup
    channels["v_Linf_Q"] = v_sup
    channels["xi_Linf_Q"] = xi_sup
    channels["overshoot_Linf_Q"] = overshoot_sup
    channels["free_energy_initial"] = float(energy[0])
    channels["free_energy_final"] = float(energy[-1])
    channels["free_energy_max_increase"] = float(np.max(np.diff(energy))) if len(energy) > 1 else 0.0
    channels["enthalpy_balance_residual"] = enthalpy_balance_residual(traj, pd, basis)

    flagged = [name for name in CHANNEL_REGISTRY if not np.isfinite(channels[name])]
    if flagged:
        logger.warning(f"⚠️ Canales no finitos en el monitor: {', '.join(flagged)}")

    return MonitorReport(
        channels={name: channels[name] for name in CHANNEL_REGISTRY},
        times=[float(t) for t in traj.times],
        free_energy_trace=[float(e) for e in energy],
        flagged=flagged,
        metadata=dict(traj.metadata),
    )


def enthalpy_balance_residual(traj: Trajectory, pd: ProblemData, basis: SpectralBasis) -> float:
    """
    max_k ‖e_t + div q − f‖_H con e = w_t + u, q = −α∇w_t − β∇w, evaluado en
    los puntos medios de la malla temporal.
    """
    _check_trajectory(traj, basis)
    if len(traj) < 2:
        return 0.0
    dt, lam = traj.dt, basis.eigenvalues
    alpha, beta = pd.params.alpha, pd.params.beta
    E = traj.v + traj.u
    v_mid = 0.5 * (traj.v[1:] + traj.v[:-1])
    w_mid = 0.5 * (traj.w[1:] + traj.w[:-1])
    forcing = np.stack([pd.forcing.project_f(basis, float(t)) for t in traj.times])
    f_mid = 0.5 * (forcing[1:] + forcing[:-1])
    residual = np.diff(E, axis=0) / dt + alpha * lam * v_mid + beta * lam * w_mid - f_mid
    return float(np.max(np.sqrt(np.sum(residual * residual, axis=1))))


# ============================================================================
# Normas de diferencias
# ============================================================================

def _common_coefficients(
    traj_a: Trajectory,
    traj_b: Trajectory,
    basis: SpectralBasis,
    basis_b: Optional[SpectralBasis],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, SpectralBasis]:
    """Diferencias (ŵ, v̂, û) en un V_n común"""
    if len(traj_a) != len(traj_b) or not np.allclose(traj_a.times, traj_b.times, rtol=0.0, atol=1e-12):
        raise TrajectoryError(
            "trajectories live on different time grids",
            details={"len_a": len(traj_a), "len_b": len(traj_b)},
        )
    basis_b = basis_b or basis
    _check_trajectory(traj_a, basis)
    _check_trajectory(traj_b, basis_b)
    if basis_b is basis or (basis_b.n_modes == basis.n_modes and basis_b.domain == basis.domain):
        return traj_a.w - traj_b.w, traj_a.v - traj_b.v, traj_a.u - traj_b.u, basis

    fine_a = basis.size >= basis_b.size
    fine, coarse = (basis, basis_b) if fine_a else (basis_b, basis)

    def restrict(arr: np.ndarray) -> np.ndarray:
        return np.stack([fine.restrict(row, coarse) for row in arr])

    if fine_a:
        pairs = [(restrict(traj_a.w), traj_b.w), (restrict(traj_a.v), traj_b.v), (restrict(traj_a.u), traj_b.u)]
    else:
        pairs = [(traj_a.w, restrict(traj_b.w)), (traj_a.v, restrict(traj_b.v)), (traj_a.u, restrict(traj_b.u))]
    (wa, wb), (va, vb), (ua, ub) = pairs
    return wa - wb, va - vb, ua - ub, coarse


def difference_norms(
    traj_a: Trajectory,
    traj_b: Trajectory,
    basis: SpectralBasis,
    basis_b: Optional[SpectralBasis] = None,
) -> Dict[str, float]:
    """
    Paquetes de normas de la diferencia (ŵ, û) = (w_a − w_b, u_a − u_b).

    ``stimaerr1`` = ‖ŵ‖_{H¹(0,T;H)} + ‖ŵ‖_{L∞(0,T;V)} + ‖û‖_{L∞(0,T;H)} + ‖û‖_{L²(0,T;V)}

    ``stimaerr2`` = ‖ŵ‖_{W^{1,∞}(0,T;V)} + ‖ŵ‖_{H¹(0,T;W)} + ‖û‖_{H¹(0,T;H)}
    + ‖û‖_{L∞(0,T;V)} + ‖û‖_{L²(0,T;W)}

    Si las bases difieren, la más fina se restringe a la más gruesa.
    """
    dw, _, du, common = _common_coefficients(traj_a, traj_b, basis, basis_b)
    dt, lam = traj_a.dt, common.eigenvalues
    h_weight = np.ones_like(lam)
    v_weight = 1.0 + lam
    w_weight = 1.0 + lam * lam
    dw_t = _forward_difference(dw, dt)
    du_t = _forward_difference(du, dt)

    def integral_sq(series: np.ndarray, weight: np.ndarray) -> float:
        return trapezoid(_weighted_sq(series, weight), dx=dt) if len(series) > 1 else 0.0

    def integral_sq_diff(series: np.ndarray, weight: np.ndarray) -> float:
        return float(dt * np.sum(_weighted_sq(series, weight)))

    def sup(series: np.ndarray, weight: np.ndarray) -> float:
        if len(series) == 0:
            return 0.0
        return float(np.sqrt(np.max(_weighted_sq(series, weight))))

    out = {
        "w_H1_L2": float(np.sqrt(integral_sq(dw, h_weight) + integral_sq_diff(dw_t, h_weight))),
        "w_Linf_H1": sup(dw, v_weight),
        "u_Linf_L2": sup(du, h_weight),
        "u_L2_H1": float(np.sqrt(integral_sq(du, v_weight))),
        "w_W1inf_H1": sup(dw, v_weight) + sup(dw_t, v_weight),
        "w_H1_H2": float(np.sqrt(integral_sq(dw, w_weight) + integral_sq_diff(dw_t, w_weight))),
        "u_H1_L2": float(np.sqrt(integral_sq(du, h_weight) + integral_sq_diff(du_t, h_weight))),
        "u_Linf_H1": sup(du, v_weight),
        "u_L2_H2": float(np.sqrt(integral_sq(du, w_weight))),
    }
    out["stimaerr1"] = sum(out[name] for name in STIMAERR1)
    out["stimaerr2"] = sum(out[name] for name in STIMAERR2)
    return {name: out[name] for name in DIFFERENCE_REGISTRY}


def perturbation_norm(a: State, b: State, basis: SpectralBasis) -> float:
    """‖û‖_H + ‖∇ŵ‖_H + ‖v̂‖_{V′}, la norma de la estimación de unicidad"""
    dw = basis.check_coefficients(a.w) - basis.check_coefficients(b.w)
    dv = basis.check_coefficients(a.v) - basis.check_coefficients(b.v)
    du = basis.check_coefficients(a.u) - basis.check_coefficients(b.u)
    l2_u, _, _ = basis.norms(du)
    _, grad_w, _ = basis.norms(dw)
    return l2_u + grad_w + basis.dual_norm(dv)


def perturbation_history(traj_a: Trajectory, traj_b: Trajectory, basis: SpectralBasis) -> np.ndarray:
    """perturbation_norm en cada nodo de tiempo"""
    if len(traj_a) != len(traj_b):
        raise TrajectoryError("trajectories have different lengths")
    return np.array([perturbation_norm(traj_a.state(k), traj_b.state(k), basis) for k in range(len(traj_a))])
