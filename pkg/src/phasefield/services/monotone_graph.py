"""
Grafos Maximales Monótonos y Regularización de Yosida
=====================================================

Catálogo de grafos γ = ∂φ en R con 0 ∈ D(γ) y 0 ∈ γ(0):

- ``double_obstacle(a, b)``: φ = indicatriz de [a, b]
- ``power(p)``: γ(s) = s|s|^(p−1), p impar
- ``linear(m)``: γ(s) = m s, m ≥ 0
- ``single_valued_smooth``: γ dado por funciones (valor, derivada, potencial)
- ``zero``

Para ε > 0:

    resolvente   J_ε = (I + εγ)⁻¹
    Yosida       γ_ε = (I − J_ε)/ε           (1/ε-Lipschitz, γ_ε(0) = 0)
    Moreau       φ_ε(s) = min_τ |τ − s|²/(2ε) + φ(τ),  φ_ε' = γ_ε

Todas las operaciones aceptan escalares o arrays de numpy; con un escalar
devuelven ``float``.
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional

import numpy as np
import sympy as sp

from ..core.exceptions import ErrorCode, GraphDomainError, PhaseFieldError

logger = logging.getLogger(__name__)

RESOLVENT_TOL = 1e-14
RESOLVENT_MAX_ITER = 200


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise PhaseFieldError(f"eps must be > 0, got {eps}", code=ErrorCode.INVALID_VALUE)
    return eps


def _out(value: np.ndarray, like: Any):
    return float(value) if np.ndim(like) == 0 else value


def solve_resolvent(
    fn: Callable[[np.ndarray], np.ndarray],
    dfn: Callable[[np.ndarray], np.ndarray],
    eps: float,
    s: np.ndarray,
    tol: float = RESOLVENT_TOL,
    max_iter: int = RESOLVENT_MAX_ITER,
) -> np.ndarray:
    """
    Resolver r + ε fn(r) = s con Newton salvaguardado por bisección.

    Como fn es monótona y fn(0) = 0, la raíz está en [min(0, s), max(0, s)];
    cada iterado de Newton que sale del intervalo se reemplaza por el punto
    medio.
    """
    s = np.asarray(s, dtype=float)
    lo = np.minimum(s, 0.0)
    hi = np.maximum(s, 0.0)
    r = s.copy()
    scale = 1.0 + np.abs(s)
    for _ in range(max_iter):
        residual = r + eps * fn(r) - s
        done = (np.abs(residual) <= tol * scale) | (hi - lo <= 4.0 * np.finfo(float).eps * scale)
        if np.all(done):
            break
        hi = np.where(residual > 0, r, hi)
        lo = np.where(residual < 0, r, lo)
        step = residual / (1.0 + eps * dfn(r))
        candidate = r - step
        outside = ~np.isfinite(candidate) | (candidate < lo) | (candidate > hi)
        candidate = np.where(outside, 0.5 * (lo + hi), candidate)
        r = np.where(done, r, candidate)
    else:
        logger.warning("Resolvente: se alcanzó el máximo de iteraciones")
    return r


class MonotoneGraph(ABC):
    """Grafo maximal monótono γ = ∂φ con 0 ∈ γ(0)"""

    name: str = "graph"
    is_single_valued: bool = False
    lower: float = -np.inf
    upper: float = np.inf

    # -- descripción ---------------------------------------------------
    def params(self) -> Dict[str, Any]:
        return {}

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, **self.params()}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    # -- dominio ---------------------------------------------------------
    def in_domain(self, s):
        s_arr = np.asarray(s, dtype=float)
        inside = (s_arr >= self.lower) & (s_arr <= self.upper)
        return bool(inside) if np.ndim(s) == 0 else inside

    def _require_domain(self, s: np.ndarray) -> None:
        if not np.all(self.in_domain(s)):
            raise GraphDomainError(
                f"argument outside D(γ) = [{self.lower}, {self.upper}]",
                details={"graph": self.describe()},
            )

    # -- interfaz principal ---------------------------------------------
    @abstractmethod
    def potential(self, s):
        """φ(s), +∞ fuera de D(φ)"""

    @abstractmethod
    def minimal_section(self, s):
        """γ⁰(s), el elemento de γ(s) de módulo mínimo"""

    @abstractmethod
    def resolvent(self, eps: float, s):
        """(I + εγ)⁻¹(s)"""

    @abstractmethod
    def yosida_derivative(self, eps: float, s):
        """γ_ε'(s) (límite por derecha en los puntos angulosos)"""

    def yosida(self, eps: float, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        return _out((s_arr - np.asarray(self.resolvent(eps, s_arr))) / eps, s)

    def moreau(self, eps: float, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        r = np.asarray(self.resolvent(eps, s_arr))
        return _out(np.asarray(self.potential(r)) + (s_arr - r) ** 2 / (2.0 * eps), s)

    # -- grafos univaluados ---------------------------------------------
    def value(self, s):
        raise PhaseFieldError(f"graph '{self.name}' is not single-valued", code=ErrorCode.INVALID_VALUE)

    def derivative(self, s):
        raise PhaseFieldError(f"graph '{self.name}' is not differentiable", code=ErrorCode.INVALID_VALUE)

    def symbolic(self, s: sp.Symbol) -> sp.Expr:
        raise PhaseFieldError(f"graph '{self.name}' has no symbolic form", code=ErrorCode.MMS)


class ZeroGraph(MonotoneGraph):
    name = "zero"
    is_single_valued = True

    def potential(self, s):
        return _out(np.zeros_like(np.asarray(s, dtype=float)), s)

    def minimal_section(self, s):
        return self.potential(s)

    def resolvent(self, eps, s):
        _check_eps(eps)
        return _out(np.array(s, dtype=float), s)

    def yosida_derivative(self, eps, s):
        _check_eps(eps)
        return self.potential(s)

    def value(self, s):
        return self.potential(s)

    def derivative(self, s):
        return self.potential(s)

    def symbolic(self, s):
        return sp.Integer(0)


class LinearGraph(MonotoneGraph):
    name = "linear"
    is_single_valued = True

    def __init__(self, slope: float = 1.0):
        if slope < 0:
            raise PhaseFieldError(f"linear graph slope must be >= 0, got {slope}", code=ErrorCode.INVALID_VALUE)
        self.slope = float(slope)

    def params(self):
        return {"slope": self.slope}

    def potential(self, s):
        s_arr = np.asarray(s, dtype=float)
        return _out(0.5 * self.slope * s_arr ** 2, s)

    def minimal_section(self, s):
        return self.value(s)

    def resolvent(self, eps, s):
        eps = _check_eps(eps)
        return _out(np.asarray(s, dtype=float) / (1.0 + eps * self.slope), s)

    def yosida(self, eps, s):
        eps = _check_eps(eps)
        return _out(self.slope * np.asarray(s, dtype=float) / (1.0 + eps * self.slope), s)

    def moreau(self, eps, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        return _out(self.slope * s_arr ** 2 / (2.0 * (1.0 + eps * self.slope)), s)

    def yosida_derivative(self, eps, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        return _out(np.full_like(s_arr, self.slope / (1.0 + eps * self.slope)), s)

    def value(self, s):
        return _out(self.slope * np.asarray(s, dtype=float), s)

    def derivative(self, s):
        s_arr = np.asarray(s, dtype=float)
        return _out(np.full_like(s_arr, self.slope), s)

    def symbolic(self, s):
        return sp.nsimplify(self.slope) * s


class DoubleObstacleGraph(MonotoneGraph):
    """γ = ∂I_[a,b]: {0} en (a, b), [0, +∞) en b, (−∞, 0] en a"""

    name = "double_obstacle"

    def __init__(self, lower: float = -1.0, upper: float = 1.0):
        if not (lower <= 0.0 <= upper and lower < upper):
            raise PhaseFieldError(
                f"double obstacle needs lower <= 0 <= upper and lower < upper, got ({lower}, {upper})",
                code=ErrorCode.INVALID_VALUE,
            )
        self.lower = float(lower)
        self.upper = float(upper)

    def params(self):
        return {"lower": self.lower, "upper": self.upper}

    def potential(self, s):
        s_arr = np.asarray(s, dtype=float)
        return _out(np.where(self.in_domain(s_arr), 0.0, np.inf), s)

    def minimal_section(self, s):
        s_arr = np.asarray(s, dtype=float)
        self._require_domain(s_arr)
        # 0 pertenece también a las semirrectas verticales de los extremos
        return _out(np.zeros_like(s_arr), s)

    def resolvent(self, eps, s):
        _check_eps(eps)
        return _out(np.clip(np.asarray(s, dtype=float), self.lower, self.upper), s)

    def moreau(self, eps, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        distance = s_arr - np.clip(s_arr, self.lower, self.upper)
        return _out(distance ** 2 / (2.0 * eps), s)

    def yosida_derivative(self, eps, s):
        eps = _check_eps(eps)
        s_arr = np.asarray(s, dtype=float)
        active = (s_arr >= self.upper) | (s_arr < self.lower)
        return _out(np.where(active, 1.0 / eps, 0.0), s)


class SmoothGraph(MonotoneGraph):
    """
    Grafo univaluado y localmente Lipschitz dado por funciones.

    Args:
        fn: γ(s), monótona con γ(0) = 0
        dfn: γ'(s) ≥ 0
        potential_fn: φ con φ(0) = 0 y φ' = γ
        symbolic_fn: forma de sympy (opcional, necesaria para MMS)
    """

    name = "single_valued_smooth"
    is_single_valued = True

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        dfn: Callable[[np.ndarray], np.ndarray],
        potential_fn: Callable[[np.ndarray], np.ndarray],
        symbolic_fn: Optional[Callable[[sp.Symbol], sp.Expr]] = None,
        label: str = "custom",
    ):
        if abs(float(fn(np.array(0.0)))) > 0.0:
            raise PhaseFieldError("smooth graph must satisfy γ(0) = 0", code=ErrorCode.INVALID_VALUE)
        self._fn = fn
        self._dfn = dfn
        self._potential = potential_fn
        self._symbolic = symbolic_fn
        self.label = label

    def params(self):
        return {"label": self.label}

    def value(self, s):
        return _out(np.asarray(self._fn(np.asarray(s, dtype=float)), dtype=float), s)

    def derivative(self, s):
        return _out(np.asarray(self._dfn(np.asarray(s, dtype=float)), dtype=float), s)

    def potential(self, s):
        return _out(np.asarray(self._potential(np.asarray(s, dtype=float)), dtype=float), s)

    def minimal_section(self, s):
        return self.value(s)

    def resolvent(self, eps, s):
        eps = _check_eps(eps)
        return _out(solve_resolvent(self._fn, self._dfn, eps, np.asarray(s, dtype=float)), s)

    def yosida_derivative(self, eps, s):
        eps = _check_eps(eps)
        r = np.asarray(self.resolvent(eps, np.asarray(s, dtype=float)))
        d = np.asarray(self._dfn(r), dtype=float)
        return _out(d / (1.0 + eps * d), s)

    def symbolic(self, s):
        if self._symbolic is None:
            return super().symbolic(s)
        return self._symbolic(s)


class PowerGraph(SmoothGraph):
    """γ(s) = s|s|^(p−1) con p impar; φ(s) = |s|^(p+1)/(p+1)"""

    name = "power"

    def __init__(self, exponent: int = 3):
        exponent = int(exponent)
        if exponent < 1 or exponent % 2 == 0:
            raise PhaseFieldError(f"power graph needs an odd exponent >= 1, got {exponent}", code=ErrorCode.INVALID_VALUE)
        self.exponent = exponent
        p = exponent
        super().__init__(
            fn=lambda s: s * np.abs(s) ** (p - 1),
            dfn=lambda s: p * np.abs(s) ** (p - 1),
            potential_fn=lambda s: np.abs(s) ** (p + 1) / (p + 1),
            symbolic_fn=lambda sym: sym ** p,
            label=f"power{p}",
        )

    def params(self):
        return {"exponent": self.exponent}


GRAPH_CATALOG = {
    "double_obstacle": DoubleObstacleGraph,
    "power": PowerGraph,
    "linear": LinearGraph,
    "zero": ZeroGraph,
}


def graph_from_name(name: str, **params: Any) -> MonotoneGraph:
    """Construir un grafo del catálogo por nombre y parámetros"""
    try:
        cls = GRAPH_CATALOG[name]
    except KeyError:
        raise PhaseFieldError(
            f"unknown graph '{name}'. Must be one of: {sorted(GRAPH_CATALOG)}",
            code=ErrorCode.UNKNOWN_GRAPH,
        )
    return cls(**params)


# Interfaz funcional
def resolvent(graph: MonotoneGraph, eps: float, s):
    return graph.resolvent(eps, s)


def yosida(graph: MonotoneGraph, eps: float, s):
    return graph.yosida(eps, s)


def moreau(graph: MonotoneGraph, eps: float, s):
    return graph.moreau(eps, s)


def minimal_section(graph: MonotoneGraph, s):
    return graph.minimal_section(s)


def yosida_derivative(graph: MonotoneGraph, eps: float, s):
    return graph.yosida_derivative(eps, s)
