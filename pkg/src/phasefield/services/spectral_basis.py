"""
Base Espectral de Neumann
=========================

Autofunciones de −Δ con condición de Neumann homogénea sobre un intervalo
[0, L] o un rectángulo [0, L0]×[0, L1]:

    v_k(x) = sqrt(c_k / L) cos(k π x / L),   c_0 = 1, c_k = 2,
    λ_k = (k π / L)²

En 2D las autofunciones son productos tensoriales y λ = λ_i + λ_j. Las
funciones son L²-ortonormales, de modo que ‖·‖_H, |·|_V y ‖Δ·‖_H son
sumas ponderadas de coeficientes.

Orden de los modos: por autovalor creciente; los empates se resuelven por
orden lexicográfico del multi-índice. La tabla ``mode_indices`` se escribe en
la cabecera de cada snapshot.

La cuadratura es Gauss–Legendre tensorial con sobremuestreo
``quadrature_factor`` respecto del número de modos por eje, para que los
términos no lineales (γ_ε(u), g(u)) no queden dominados por aliasing.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..core.exceptions import InvalidDomainError, ShapeMismatchError

logger = logging.getLogger(__name__)

# Alias de tipos: un CoeffVector es un array 1D de longitud dim(V_n);
# una GridFunction es un array con la forma de la malla de cuadratura.
CoeffVector = np.ndarray
GridFunction = np.ndarray

DEFAULT_QUADRATURE_FACTOR = 3


@dataclass(frozen=True)
class BoxDomain:
    """Dominio caja Ω = Π [0, L_d], d = 1 o 2"""
    lengths: Tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(length) for length in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) not in (1, 2):
            raise InvalidDomainError(f"domain dimension must be 1 or 2, got {len(lengths)}")
        if any(not np.isfinite(length) or length <= 0 for length in lengths):
            raise InvalidDomainError(f"domain lengths must be positive, got {lengths}")

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))


def _axis_values(n: int, x: np.ndarray, length: float) -> np.ndarray:
    """Valores de v_0..v_{n-1} en los puntos x, forma (n, len(x))"""
    k = np.arange(n)[:, None]
    scale = np.where(k == 0, np.sqrt(1.0 / length), np.sqrt(2.0 / length))
    return scale * np.cos(k * np.pi * x[None, :] / length)


def _axis_derivatives(n: int, x: np.ndarray, length: float) -> np.ndarray:
    k = np.arange(n)[:, None]
    scale = np.where(k == 0, 0.0, np.sqrt(2.0 / length))
    return -scale * (k * np.pi / length) * np.sin(k * np.pi * x[None, :] / length)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Espacio discreto V_n con su cuadratura. Inmutable tras construirse."""
    domain: BoxDomain
    n_modes: Tuple[int, ...]
    eigenvalues: np.ndarray
    mode_indices: np.ndarray
    nodes: Tuple[np.ndarray, ...]
    weights: Tuple[np.ndarray, ...]
    axis_values: Tuple[np.ndarray, ...] = field(repr=False)
    axis_derivatives: Tuple[np.ndarray, ...] = field(repr=False)

    # ------------------------------------------------------------------
    # Propiedades
    # ------------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def size(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def grid_shape(self) -> Tuple[int, ...]:
        return tuple(len(x) for x in self.nodes)

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Pesos tensoriales con la forma de la malla"""
        w = self.weights[0]
        for axis_weights in self.weights[1:]:
            w = np.multiply.outer(w, axis_weights)
        w.setflags(write=False)
        return w

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Coordenadas de los nodos, una por eje, con la forma de la malla"""
        grids = np.meshgrid(*self.nodes, indexing="ij")
        for g in grids:
            g.setflags(write=False)
        return tuple(grids)

    @cached_property
    def synthesis_matrix(self) -> np.ndarray:
        """Matriz B (size, n_nodos) con B[i, q] = v_i(x_q); se usa en el jacobiano"""
        if self.dim == 1:
            columns = self.axis_values[0][self.mode_indices[:, 0]]
        else:
            v0 = self.axis_values[0][self.mode_indices[:, 0]]
            v1 = self.axis_values[1][self.mode_indices[:, 1]]
            columns = (v0[:, :, None] * v1[:, None, :]).reshape(self.size, -1)
        columns.setflags(write=False)
        return columns

    @cached_property
    def _index_lookup(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(int(k) for k in idx): i for i, idx in enumerate(self.mode_indices)}

    # ------------------------------------------------------------------
    # Validaciones
    # ------------------------------------------------------------------
    def check_coefficients(self, c: CoeffVector) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.size,):
            raise ShapeMismatchError(
                f"coefficient vector has shape {c.shape}, expected ({self.size},)",
                details={"got": list(c.shape), "expected": [self.size]},
            )
        return c

    def check_grid(self, gf: GridFunction) -> np.ndarray:
        gf = np.asarray(gf, dtype=float)
        if gf.shape != self.grid_shape:
            raise ShapeMismatchError(
                f"grid function has shape {gf.shape}, expected {self.grid_shape}",
                details={"got": list(gf.shape), "expected": list(self.grid_shape)},
            )
        return gf

    # ------------------------------------------------------------------
    # Transformaciones
    # ------------------------------------------------------------------
    def _scatter(self, c: np.ndarray) -> np.ndarray:
        tensor = np.zeros(self.n_modes)
        tensor[tuple(self.mode_indices.T)] = c
        return tensor

    def _synthesize(self, c: np.ndarray, matrices: Sequence[np.ndarray]) -> np.ndarray:
        out = self._scatter(c)
        for mat in matrices:
            out = np.tensordot(out, mat, axes=([0], [0]))
        return out

    def to_grid(self, c: CoeffVector) -> GridFunction:
        """Síntesis puntual Σ c_i v_i en los nodos de cuadratura"""
        c = self.check_coefficients(c)
        return self._synthesize(c, self.axis_values)

    def project(self, gf: GridFunction) -> CoeffVector:
        """Proyección L²-ortogonal P_n calculada con la cuadratura"""
        gf = self.check_grid(gf)
        out = gf * self.quadrature_weights
        for mat in self.axis_values:
            out = np.tensordot(out, mat, axes=([0], [1]))
        return out[tuple(self.mode_indices.T)]

    def gradient(self, c: CoeffVector) -> np.ndarray:
        """Gradiente espectral en la malla, forma (dim, *grid_shape)"""
        c = self.check_coefficients(c)
        components = []
        for axis in range(self.dim):
            mats = [
                self.axis_derivatives[d] if d == axis else self.axis_values[d]
                for d in range(self.dim)
            ]
            components.append(self._synthesize(c, mats))
        return np.stack(components)

    def laplacian(self, c: CoeffVector) -> CoeffVector:
        """Coeficientes de Δu: multiplicación por −λ_i"""
        return -self.eigenvalues * self.check_coefficients(c)

    def evaluate(self, c: CoeffVector, points: Sequence[np.ndarray]) -> np.ndarray:
        """Evalúa Σ c_i v_i en puntos arbitrarios (una coordenada por eje)"""
        c = self.check_coefficients(c)
        if len(points) != self.dim:
            raise ShapeMismatchError(f"expected {self.dim} coordinate arrays, got {len(points)}")
        coords = [np.asarray(p, dtype=float) for p in points]
        shape = np.broadcast(*coords).shape
        flat = [np.broadcast_to(p, shape).ravel() for p in coords]
        product = np.ones((self.size, flat[0].size))
        for axis, x in enumerate(flat):
            values = _axis_values(self.n_modes[axis], x, self.domain.lengths[axis])
            product *= values[self.mode_indices[:, axis]]
        return (c @ product).reshape(shape)

    def restrict(self, c: CoeffVector, coarse: "SpectralBasis") -> CoeffVector:
        """Proyección de V_n sobre un subespacio anidado V_m (m ≤ n)"""
        c = self.check_coefficients(c)
        return c[self._nested_positions(coarse)]

    def prolong(self, c_coarse: CoeffVector, coarse: "SpectralBasis") -> CoeffVector:
        """Inclusión V_m ⊂ V_n: coeficientes de una función de ``coarse`` en esta base"""
        c_coarse = coarse.check_coefficients(c_coarse)
        out = np.zeros(self.size)
        out[self._nested_positions(coarse)] = c_coarse
        return out

    def _nested_positions(self, coarse: "SpectralBasis") -> np.ndarray:
        if coarse.domain != self.domain:
            raise ShapeMismatchError("bases live on different domains")
        lookup = self._index_lookup
        try:
            idx = [lookup[tuple(int(k) for k in mi)] for mi in coarse.mode_indices]
        except KeyError:
            raise ShapeMismatchError(
                f"basis with modes {coarse.n_modes} is not nested in {self.n_modes}"
            )
        return np.asarray(idx, dtype=int)

    # ------------------------------------------------------------------
    # Integrales y normas
    # ------------------------------------------------------------------
    def integrate(self, gf: GridFunction) -> float:
        return float(np.sum(self.check_grid(gf) * self.quadrature_weights))

    def inner(self, a: GridFunction, b: GridFunction) -> float:
        return self.integrate(np.asarray(a) * np.asarray(b))

    def _as_coefficients(self, c_or_gf: Union[CoeffVector, GridFunction]) -> np.ndarray:
        arr = np.asarray(c_or_gf, dtype=float)
        if arr.shape == self.grid_shape:
            return self.project(arr)
        return self.check_coefficients(arr)

    def norms(self, c_or_gf: Union[CoeffVector, GridFunction]) -> Tuple[float, float, float]:
        """(‖·‖_H, |·|_V, ‖Δ·‖_H), exactas en la base de autofunciones"""
        c = self._as_coefficients(c_or_gf)
        c2 = c * c
        lam = self.eigenvalues
        return (
            float(np.sqrt(np.sum(c2))),
            float(np.sqrt(np.sum(lam * c2))),
            float(np.sqrt(np.sum(lam * lam * c2))),
        )

    def dual_norm(self, c_or_gf: Union[CoeffVector, GridFunction]) -> float:
        """Norma en V′ para la dualidad de (1 − Δ): sqrt(Σ c_i² / (1 + λ_i))"""
        c = self._as_coefficients(c_or_gf)
        return float(np.sqrt(np.sum(c * c / (1.0 + self.eigenvalues))))


def build_basis(
    domain: BoxDomain,
    n_modes: Union[int, Sequence[int]],
    quadrature_factor: int = DEFAULT_QUADRATURE_FACTOR,
) -> SpectralBasis:
    """
    Construir la base de Neumann sobre ``domain``.

    Args:
        domain: Dominio caja (1D o 2D)
        n_modes: Modos por eje (un entero se replica en todos los ejes)
        quadrature_factor: Nodos de Gauss–Legendre por modo (≥ 2)

    Returns:
        SpectralBasis: autopares exactos, modo 0 constante con λ = 0
    """
    if isinstance(n_modes, (int, np.integer)):
        n_modes = (int(n_modes),) * domain.dim
    n_modes = tuple(int(n) for n in n_modes)
    if len(n_modes) != domain.dim:
        raise InvalidDomainError(f"n_modes {n_modes} does not match domain dimension {domain.dim}")
    if any(n < 1 for n in n_modes):
        raise InvalidDomainError(f"mode counts must be positive, got {n_modes}")
    if quadrature_factor < 2:
        raise InvalidDomainError("quadrature_factor must be at least 2")

    nodes, weights, values, derivatives, axis_eigs = [], [], [], [], []
    for n, length in zip(n_modes, domain.lengths):
        xi, wi = leggauss(quadrature_factor * n + 4)
        x = 0.5 * length * (xi + 1.0)
        w = 0.5 * length * wi
        nodes.append(x)
        weights.append(w)
        values.append(_axis_values(n, x, length))
        derivatives.append(_axis_derivatives(n, x, length))
        axis_eigs.append((np.arange(n) * np.pi / length) ** 2)

    multi = np.array(list(np.ndindex(*n_modes)), dtype=int)
    eigs = np.zeros(len(multi))
    for axis in range(domain.dim):
        eigs = eigs + axis_eigs[axis][multi[:, axis]]
    order = np.argsort(eigs, kind="stable")
    multi = multi[order]
    eigs = eigs[order]

    for arr in (eigs, multi, *nodes, *weights, *values, *derivatives):
        arr.setflags(write=False)

    basis = SpectralBasis(
        domain=domain,
        n_modes=n_modes,
        eigenvalues=eigs,
        mode_indices=multi,
        nodes=tuple(nodes),
        weights=tuple(weights),
        axis_values=tuple(values),
        axis_derivatives=tuple(derivatives),
    )
    logger.debug(f"Base espectral construida: modos={n_modes}, nodos={basis.grid_shape}")
    return basis


def to_grid(c: CoeffVector, basis: SpectralBasis) -> GridFunction:
    return basis.to_grid(c)


def project(gf: GridFunction, basis: SpectralBasis) -> CoeffVector:
    return basis.project(gf)


def norms(c_or_gf: Union[CoeffVector, GridFunction], basis: SpectralBasis) -> Tuple[float, float, float]:
    return basis.norms(c_or_gf)
