"""
Soluciones Manufacturadas
=========================

Dado un par cerrado (w*, u*), las fuentes se obtienen sustituyendo en la
forma fuerte del sistema:

    f = w*_tt − αΔw*_t − βΔw* + u*_t
    h = u*_t − Δu* + γ(u*) + g(u*) − w*_t

Las expresiones simbólicas (sympy) se convierten en funciones numpy con
``lambdify``. Solo se admiten grafos univaluados con expresión simbólica; la
ejecución usa γ sin regularizar.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
import sympy as sp

from ..core.exceptions import MMSConfigurationError
from .problem import ForcingTerm, InitialData, ProblemData
from .spectral_basis import SpectralBasis

logger = logging.getLogger(__name__)

T = sp.Symbol("t", real=True)
SPACE = (sp.Symbol("x", real=True), sp.Symbol("y", real=True))


def _symbols(dim: int) -> Tuple[sp.Symbol, ...]:
    return SPACE[:dim]


def _laplacian(expr: sp.Expr, xs: Sequence[sp.Symbol]) -> sp.Expr:
    return sum((sp.diff(expr, x, 2) for x in xs), sp.Integer(0))


def _numeric(expr: sp.Expr, xs: Sequence[sp.Symbol], with_time: bool = True) -> Callable:
    args = (*xs, T) if with_time else tuple(xs)
    fn = sp.lambdify(args, expr, modules="numpy")
    if with_time:
        return lambda coords, t: np.asarray(fn(*coords, t), dtype=float)
    return lambda coords: np.asarray(fn(*coords), dtype=float)


@dataclass(frozen=True)
class ManufacturedSolution:
    """Par (w*, u*) como expresiones en x (, y) y t"""
    w: sp.Expr
    u: sp.Expr
    dim: int = 1
    name: str = "manufactured"
    _cache: Dict[str, Callable] = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def from_strings(cls, w: str, u: str, dim: int = 1, name: str = "manufactured") -> "ManufacturedSolution":
        local = {"t": T, **{str(s): s for s in _symbols(dim)}}
        try:
            return cls(w=sp.sympify(w, locals=local), u=sp.sympify(u, locals=local), dim=dim, name=name)
        except (sp.SympifyError, TypeError) as e:
            raise MMSConfigurationError(f"cannot parse manufactured solution: {e}")

    @property
    def symbols(self) -> Tuple[sp.Symbol, ...]:
        return _symbols(self.dim)

    def source_expressions(self, pd: ProblemData) -> Tuple[sp.Expr, sp.Expr]:
        """(f, h) simbólicos para los parámetros y no linealidades de ``pd``"""
        graph, nl = pd.graph, pd.nl
        if not graph.is_single_valued:
            raise MMSConfigurationError(f"manufactured solutions need a smooth single-valued graph, got '{graph.name}'")
        try:
            gamma_u = graph.symbolic(self.u)
        except Exception as e:
            raise MMSConfigurationError(f"graph '{graph.name}' has no symbolic form: {e}")
        if nl.symbolic is None:
            raise MMSConfigurationError(f"nonlinearity '{nl.name}' has no symbolic form")

        xs = self.symbols
        alpha = sp.nsimplify(pd.params.alpha)
        beta = sp.nsimplify(pd.params.beta)
        w_t = sp.diff(self.w, T)
        u_t = sp.diff(self.u, T)
        f = sp.diff(self.w, T, 2) - alpha * _laplacian(w_t, xs) - beta * _laplacian(self.w, xs) + u_t
        h = u_t - _laplacian(self.u, xs) + gamma_u + nl.symbolic(self.u) - w_t
        return sp.simplify(f), sp.simplify(h)

    def forcing(self, pd: ProblemData) -> ForcingTerm:
        f, h = self.source_expressions(pd)
        logger.debug(f"Fuentes manufacturadas: f = {f}, h = {h}")
        return ForcingTerm(name=f"mms:{self.name}", f=_numeric(f, self.symbols), h=_numeric(h, self.symbols))

    def initial_data(self) -> InitialData:
        xs = self.symbols
        w_t = sp.diff(self.w, T)
        return InitialData(
            w0=_numeric(self.w.subs(T, 0), xs, with_time=False),
            v0=_numeric(w_t.subs(T, 0), xs, with_time=False),
            u0=_numeric(self.u.subs(T, 0), xs, with_time=False),
        )

    def problem(self, template: ProblemData) -> ProblemData:
        """Datos del problema: fuentes y datos iniciales manufacturados, γ sin regularizar"""
        if template.domain.dim != self.dim:
            raise MMSConfigurationError(
                f"manufactured solution is {self.dim}D, domain is {template.domain.dim}D"
            )
        pd = template.with_params(regularize=False) if template.graph.is_single_valued else template
        return ProblemData(
            params=pd.params,
            domain=pd.domain,
            graph=pd.graph,
            nl=pd.nl,
            forcing=self.forcing(pd),
            init=self.initial_data(),
        )

    def exact_grid(self, basis: SpectralBasis, t: float) -> Dict[str, np.ndarray]:
        """w*, w*_t y u* en la malla de cuadratura"""
        xs = self.symbols
        exprs = {"w": self.w, "v": sp.diff(self.w, T), "u": self.u}
        out = {}
        for key, expr in exprs.items():
            if key not in self._cache:
                self._cache[key] = _numeric(expr, xs)
            out[key] = np.broadcast_to(self._cache[key](basis.coordinates, t), basis.grid_shape)
        return out


def default_manufactured(dim: int = 1) -> ManufacturedSolution:
    """w* = cos(πx) e^{−t}, u* = cos(πx)(1 + t) sobre [0, 1]^dim"""
    x = SPACE[0]
    return ManufacturedSolution(
        w=sp.cos(sp.pi * x) * sp.exp(-T),
        u=sp.cos(sp.pi * x) * (1 + T),
        dim=dim,
        name="cos_exp",
    )
