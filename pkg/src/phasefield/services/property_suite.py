"""
Suite de propiedades para el subcomando ``check``
"""
import logging
import time
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..core.exceptions import PhaseFieldError
from ..schemas.reports import PropertyResult, PropertySuiteReport
from .asymptotics import fit_rate, gronwall_response
from .diagnostics import CHANNEL_REGISTRY, convolve_time, difference_norms, monitor
from .galerkin_solver import GalerkinSolver, SolverConfig, TimeScheme, basis_for, project_initial_data, step
from .monotone_graph import GRAPH_CATALOG, MonotoneGraph, graph_from_name
from .problem import (
    InitialData,
    ProblemData,
    ProblemParams,
    constant_profile,
    cosine_profile,
    free_energy,
    linear_nonlinearity,
    obstacle_well,
)
from .spectral_basis import BoxDomain, build_basis

logger = logging.getLogger(__name__)

YOSIDA_EPS = (1e-1, 1e-2, 1e-3)
YOSIDA_SAMPLES = 10_000
YOSIDA_TOL = 1e-12
MODE0_DATA = (0.3, 0.7, -0.2)


def catalog_graphs() -> List[MonotoneGraph]:
    """Un representante por entrada del catálogo"""
    params = {"double_obstacle": {"lower": -1.0, "upper": 1.0}, "power": {"exponent": 3}, "linear": {"slope": 1.0}}
    return [graph_from_name(name, **params.get(name, {})) for name in GRAPH_CATALOG]


def smooth_problem(t_final: float = 0.5) -> ProblemData:
    """Problema suave 1D de referencia para estabilidad y determinismo"""
    domain = BoxDomain((1.0,))
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=0.5, eps=1e-2, t_final=t_final),
        domain=domain,
        graph=graph_from_name("power", exponent=3),
        nl=linear_nonlinearity(1.0),
        init=InitialData(
            w0=cosine_profile(0.2, (2,), domain.lengths),
            v0=constant_profile(0.0),
            u0=cosine_profile(0.5, (1,), domain.lengths),
        ),
    )


class PropertySuiteService:
    """
    Ejecuta las propiedades por nombre y arma un ``PropertySuiteReport``.
    Cada propiedad devuelve (pasa, detalles); una excepción del sistema cuenta
    como fallo con su error en los detalles.
    """

    def __init__(self, pd: Optional[ProblemData] = None, cfg: Optional[SolverConfig] = None, seed: int = 20240101):
        self.pd = pd
        self.cfg = cfg
        self.seed = seed
        self.properties: Dict[str, Callable[[], tuple]] = {
            "yosida_catalog": self.check_yosida_catalog,
            "basis_invariants": self.check_basis_invariants,
            "mode0_oracle": self.check_mode0_oracle,
            "equilibrium": self.check_equilibrium,
            "convolution": self.check_convolution,
            "rate_fit_sanity": self.check_rate_fit,
            "difference_norms": self.check_difference_norms,
            "gronwall_stability": self.check_gronwall,
            "determinism": self.check_determinism,
            "free_energy_dissipation": self.check_dissipation,
        }

    def run(self, selected: Optional[Sequence[str]] = None) -> PropertySuiteReport:
        names = list(selected) if selected else list(self.properties)
        unknown = [name for name in names if name not in self.properties]
        if unknown:
            raise PhaseFieldError(f"unknown properties: {unknown}", details={"available": list(self.properties)})

        results = []
        for name in names:
            start = time.perf_counter()
            try:
                passed, details = self.properties[name]()
            except PhaseFieldError as e:
                passed, details = False, {"error": e.to_dict()}
            elapsed = time.perf_counter() - start
            status = "✅" if passed else "❌"
            logger.info(f"{status} {name} ({elapsed:.2f}s)")
            results.append(PropertyResult(name=name, passed=bool(passed), elapsed_seconds=elapsed, details=details))
        return PropertySuiteReport(results=results, metadata={"seed": self.seed})

    # ------------------------------------------------------------------
    # Grafos monótonos
    # ------------------------------------------------------------------
    def check_yosida_catalog(self):
        rng = np.random.default_rng(self.seed)
        violations: Dict[str, int] = {}
        for graph in catalog_graphs():
            for eps in YOSIDA_EPS:
                s = np.sort(rng.uniform(-3.0, 3.0, YOSIDA_SAMPLES))
                count = _yosida_violations(graph, eps, s)
                if count:
                    violations[f"{graph.name}@{eps:g}"] = count
        return not violations, {"violations": violations, "samples": YOSIDA_SAMPLES, "eps": list(YOSIDA_EPS)}

    # ------------------------------------------------------------------
    # Base espectral
    # ------------------------------------------------------------------
    def check_basis_invariants(self):
        details = {}
        for lengths, n_modes in (((2.0,), 12), ((1.0, 1.5), (6, 5))):
            basis = build_basis(BoxDomain(lengths), n_modes)
            B = basis.synthesis_matrix
            gram = (B * basis.quadrature_weights.ravel()) @ B.T
            orth = float(np.max(np.abs(gram - np.eye(basis.size))))
            c = np.random.default_rng(self.seed).standard_normal(basis.size)
            exact = float(np.max(np.abs(basis.project(basis.to_grid(c)) - c)))
            coarse_modes = 4 if len(lengths) == 1 else (3, 3)
            coarse = build_basis(basis.domain, coarse_modes)
            c_coarse = basis.restrict(c, coarse)
            fine_values = basis.evaluate(basis.prolong(c_coarse, coarse), coarse.coordinates)
            nested = float(np.max(np.abs(fine_values - coarse.to_grid(c_coarse))))
            details[f"{len(lengths)}d"] = {"orthonormality": orth, "projection": exact, "nesting": nested}
        worst = max(v for d in details.values() for v in d.values())
        return worst <= 1e-12, details

    # ------------------------------------------------------------------
    # Solver
    # ------------------------------------------------------------------
    def check_mode0_oracle(self):
        c0, c1, c2 = MODE0_DATA
        domain = BoxDomain((1.0,))
        pd = ProblemData(
            params=ProblemParams(alpha=1.0, beta=1.0, t_final=1.0),
            domain=domain,
            init=InitialData(constant_profile(c0), constant_profile(c1), constant_profile(c2)),
        )
        v_exact = c1 * np.exp(-1.0)
        u_exact = c2 + c1 * (1.0 - np.exp(-1.0))
        details, passed = {}, True
        for scheme, order in ((TimeScheme.IMEX_EULER, 1), (TimeScheme.IMEX_CN, 2)):
            for dt in (1e-2, 1e-3):
                cfg = SolverConfig(n_modes=4, dt=dt, scheme=scheme)
                final = GalerkinSolver(pd, cfg).solve().final
                scale = np.sqrt(domain.volume)
                error = max(abs(final.v[0] / scale - v_exact), abs(final.u[0] / scale - u_exact))
                bound = 5.0 * dt ** order
                details[f"{scheme.value}@{dt:g}"] = {"error": float(error), "bound": bound}
                passed = passed and error <= bound
        return passed, details

    def check_equilibrium(self):
        domain = BoxDomain((1.0,))
        pd = ProblemData(
            params=ProblemParams(),
            domain=domain,
            init=InitialData(w0=constant_profile(0.8)),
        )
        cfg = SolverConfig(n_modes=8, dt=1e-2)
        basis = basis_for(domain, cfg)
        start = project_initial_data(pd.init, basis)
        new = step(start, pd, cfg, basis)
        drift = max(float(np.max(np.abs(getattr(new, name) - getattr(start, name)))) for name in ("w", "v", "u"))
        return drift <= 1e-12, {"drift": drift}

    def check_determinism(self):
        pd = self.pd or smooth_problem()
        cfg = self.cfg or SolverConfig(n_modes=8, dt=1e-2, scheme=TimeScheme.IMEX_CN)
        a = GalerkinSolver(pd, cfg).solve()
        b = GalerkinSolver(pd, cfg).solve()
        same = all(np.array_equal(getattr(a, name), getattr(b, name)) for name in ("times", "w", "v", "u"))
        return same, {"states": len(a)}

    def check_gronwall(self):
        response = gronwall_response(
            smooth_problem(),
            SolverConfig(n_modes=8, dt=1e-2, scheme=TimeScheme.IMEX_CN),
        )
        details = {
            "deltas": list(response.deltas),
            "ratios": [float(r) for r in response.ratios],
            "spread": response.spread,
            "deterministic": response.deterministic,
        }
        return response.stable(0.1) and response.deterministic, details

    def check_dissipation(self):
        """Flujo gradiente (w_t ≡ 0): Ψ(0, u) no crece, holgura 1e-10 por paso"""
        domain = BoxDomain((1.0,))
        pd = ProblemData(
            params=ProblemParams(eps=1e-2, t_final=0.1),
            domain=domain,
            graph=graph_from_name("double_obstacle", lower=-1.0, upper=1.0),
            nl=obstacle_well(),
            init=InitialData(u0=cosine_profile(0.9, (1,), domain.lengths)),
        )
        cfg = SolverConfig(n_modes=16, dt=1e-3, freeze_thermal=True)
        solver = GalerkinSolver(pd, cfg)
        traj = solver.solve()
        basis = solver.basis
        zero = np.zeros(basis.grid_shape)
        energy = np.array([
            free_energy(zero, basis.to_grid(u), basis, pd.potential, pd.nl.G) for u in traj.u
        ])
        increase = float(np.max(np.diff(energy)))
        return increase <= 1e-10, {
            "steps": len(traj) - 1,
            "max_increase": increase,
            "initial": float(energy[0]),
            "final": float(energy[-1]),
        }

    # ------------------------------------------------------------------
    # Diagnósticos
    # ------------------------------------------------------------------
    def check_convolution(self):
        dt = 1e-3
        t = np.arange(1001) * dt
        decay = convolve_time(np.exp(-t), 1.0, dt)
        analytic = float(np.max(np.abs(decay - (1.0 - np.exp(-t)))))
        constant = float(np.max(np.abs(convolve_time(np.full_like(t, 2.5), 1.0, dt) - 2.5 * t)))
        rng = np.random.default_rng(self.seed)
        a, b, c = rng.standard_normal((3, 64))
        lhs = convolve_time(2.0 * a + 3.0 * b, c, 0.1)
        rhs = 2.0 * convolve_time(a, c, 0.1) + 3.0 * convolve_time(b, c, 0.1)
        bilinear = float(np.max(np.abs(lhs - rhs)))
        passed = analytic <= dt * dt and constant <= 1e-12 and bilinear <= 1e-12
        return passed, {"analytic": analytic, "constant": constant, "bilinear": bilinear}

    def check_rate_fit(self):
        beta = np.array([1e-1, 2.5e-2, 6.25e-3, 1.5625e-3])
        p = 1.37
        fit = fit_rate(beta, 0.42 * beta ** p)
        error = abs(fit.slope - p) if fit.slope is not None else np.inf
        return error <= 1e-10, {"slope": fit.slope, "expected": p}

    def check_difference_norms(self):
        """Desigualdad triangular por canal y monotonía de canales L∞ en sub-trayectorias"""
        pd = smooth_problem(t_final=0.2)
        cfg = SolverConfig(n_modes=8, dt=1e-2)
        solver = GalerkinSolver(pd, cfg)
        basis = solver.basis
        a = solver.solve()
        b = GalerkinSolver(pd.with_params(beta=0.1), cfg, basis).solve()
        c = GalerkinSolver(pd.with_params(beta=0.0), cfg, basis).solve()
        ab, bc, ac = difference_norms(a, b, basis), difference_norms(b, c, basis), difference_norms(a, c, basis)
        triangle = [name for name in ac if ac[name] > ab[name] + bc[name] + 1e-12]
        self_zero = max(difference_norms(a, a, basis).values())

        full = monitor(a, pd, basis).channels
        sub = monitor(a.slice(0, len(a) // 2), pd, basis).channels
        sup_channels = [name for name in CHANNEL_REGISTRY if "Linf" in name]
        monotone = [name for name in sup_channels if sub[name] > full[name]]
        passed = not triangle and self_zero == 0.0 and not monotone
        return passed, {"triangle_violations": triangle, "self_difference": self_zero, "monotonicity_violations": monotone}


def _yosida_violations(graph: MonotoneGraph, eps: float, s: np.ndarray) -> int:
    """
    Violaciones de monotonía, Lipschitz 1/ε, γ_ε(0) = 0, |γ_ε| ≤ |γ⁰| y 0 ≤ φ_ε ≤ φ.

    En 1D basta comparar pares adyacentes de la muestra ordenada: monotonía y
    cota de Lipschitz entre vecinos se propagan a cualquier par por telescopía.
    """
    tol = YOSIDA_TOL
    y = np.asarray(graph.yosida(eps, s), dtype=float)
    count = 0
    dy, ds = np.diff(y), np.diff(s)
    count += int(np.count_nonzero(dy < -tol * (1.0 + np.abs(y[1:]))))
    count += int(np.count_nonzero(np.abs(dy) > ds / eps * (1.0 + tol) + tol))
    count += int(abs(float(graph.yosida(eps, 0.0))) > tol)

    inside = np.asarray(graph.in_domain(s), dtype=bool)
    gamma0 = np.asarray(graph.minimal_section(s[inside]), dtype=float)
    count += int(np.count_nonzero(np.abs(y[inside]) > np.abs(gamma0) * (1.0 + tol) + tol))

    phi_eps = np.asarray(graph.moreau(eps, s), dtype=float)
    phi = np.asarray(graph.potential(s), dtype=float)
    count += int(np.count_nonzero(phi_eps < -tol))
    count += int(np.count_nonzero(phi_eps > phi * (1.0 + tol) + tol))
    return count


def run_property_suite(
    pd: Optional[ProblemData] = None,
    cfg: Optional[SolverConfig] = None,
    selected: Optional[Sequence[str]] = None,
) -> PropertySuiteReport:
    return PropertySuiteService(pd, cfg).run(selected)
