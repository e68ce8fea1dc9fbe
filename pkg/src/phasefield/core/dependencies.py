"""
Construcción de Dependencias
============================

Traduce un ``RunConfig`` validado en los objetos de los servicios
(``ProblemData``, ``SolverConfig``, planes de barrido, solución manufacturada)
y provee los servicios compartidos.
"""
import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from ..schemas.run_config import (
    DEFAULT_BETA_LADDER,
    DEFAULT_EPS_LADDER,
    DEFAULT_MMS_LADDER,
    ProfileConfig,
    RunConfig,
)
from ..services.asymptotics import PerturbationRule, SweepParameter, SweepPlan
from ..services.galerkin_solver import SolverConfig
from ..services.manufactured import ManufacturedSolution
from ..services.monotone_graph import MonotoneGraph, graph_from_name
from ..services.problem import (
    ForcingTerm,
    InitialData,
    ProblemData,
    ProblemParams,
    SmoothNonlinearity,
    constant_forcing,
    constant_profile,
    cosine_profile,
    linear_nonlinearity,
    mode_forcing,
    obstacle_well,
    tanh_front,
    zero_forcing,
    zero_nonlinearity,
)
from ..services.spectral_basis import BoxDomain
from .environment import get_settings

logger = logging.getLogger(__name__)


# ============================================================================
# Builders de datos del problema
# ============================================================================

def build_domain(config: RunConfig) -> BoxDomain:
    return BoxDomain(tuple(config.domain.lengths))


def build_graph(config: RunConfig) -> MonotoneGraph:
    params = config.graph.model_dump(exclude={"name"})
    return graph_from_name(config.graph.name, **params)


def build_nonlinearity(config: RunConfig) -> SmoothNonlinearity:
    nl = config.nonlinearity
    if nl.name == "linear":
        return linear_nonlinearity(nl.slope)
    if nl.name == "obstacle_well":
        return obstacle_well()
    return zero_nonlinearity()


def build_forcing(config: RunConfig) -> ForcingTerm:
    forcing = config.forcing
    if forcing.name == "constant":
        return constant_forcing(forcing.value)
    if forcing.name == "mode":
        return mode_forcing(forcing.amplitude, forcing.index, config.domain.lengths, forcing.frequency)
    return zero_forcing()


def build_profile(profile: ProfileConfig, lengths):
    if profile.kind == "cosine":
        return cosine_profile(profile.amplitude, profile.index, lengths, profile.offset)
    if profile.kind == "tanh_front":
        return tanh_front(profile.center, profile.width, profile.amplitude, profile.axis)
    return constant_profile(profile.value)


def build_initial_data(config: RunConfig) -> InitialData:
    lengths = config.domain.lengths
    return InitialData(
        w0=build_profile(config.initial.w0, lengths),
        v0=build_profile(config.initial.v0, lengths),
        u0=build_profile(config.initial.u0, lengths),
    )


def build_problem(config: RunConfig) -> ProblemData:
    """ProblemData completo a partir de la configuración"""
    p = config.params
    return ProblemData(
        params=ProblemParams(alpha=p.alpha, beta=p.beta, eps=p.eps, t_final=p.t_final, regularize=p.regularize),
        domain=build_domain(config),
        graph=build_graph(config),
        nl=build_nonlinearity(config),
        forcing=build_forcing(config),
        init=build_initial_data(config),
    )


def build_solver_config(config: RunConfig) -> SolverConfig:
    s = config.solver
    n_modes = config.basis.n_modes
    return SolverConfig(
        n_modes=tuple(n_modes) if isinstance(n_modes, list) else n_modes,
        dt=s.dt,
        scheme=s.scheme,
        newton_tol=s.newton_tol,
        newton_max_iter=s.newton_max_iter,
        quadrature_factor=config.basis.quadrature_factor,
        freeze_thermal=s.freeze_thermal,
    )


# ============================================================================
# Builders de experimentos
# ============================================================================

def build_perturbation_rule(config: RunConfig) -> PerturbationRule:
    p = config.sweeps.beta.perturbation
    return PerturbationRule(
        enabled=p.enabled,
        mode_position=p.mode_position,
        components=frozenset(p.components),
        violate_uniform_bound=p.violate_uniform_bound,
    )


def build_sweep_plan(config: RunConfig, parameter: SweepParameter, threads: Optional[int] = None) -> SweepPlan:
    parameter = SweepParameter(parameter)
    if parameter is SweepParameter.BETA:
        ladder = config.sweeps.beta.values(DEFAULT_BETA_LADDER)
    elif parameter is SweepParameter.EPS:
        ladder = config.sweeps.eps.values(DEFAULT_EPS_LADDER)
    else:
        ladder = config.mms.values(DEFAULT_MMS_LADDER)
    return SweepPlan(
        parameter=parameter,
        ladder=tuple(ladder),
        pd=build_problem(config),
        cfg=build_solver_config(config),
        perturbation=build_perturbation_rule(config),
        threads=threads or config.output.threads,
    )


def build_manufactured(config: RunConfig) -> ManufacturedSolution:
    return ManufacturedSolution.from_strings(config.mms.w, config.mms.u, dim=len(config.domain.lengths))


def resolve_output_dir(config: RunConfig, override: Optional[str] = None) -> Path:
    """--out, luego output.directory de la configuración, luego PHASEFIELD_OUTPUT_DIR"""
    directory = override or config.output.directory or get_settings().output_dir
    return Path(directory)


# ============================================================================
# Providers de servicios
# ============================================================================

@lru_cache()
def get_result_repository():
    """Provider para ResultRepository"""
    from ..repositories.result_repository import ResultRepository
    return ResultRepository()


def get_property_suite_service(config: Optional[RunConfig] = None):
    """Provider para PropertySuiteService con el problema de la configuración"""
    from ..services.property_suite import PropertySuiteService
    if config is None:
        return PropertySuiteService()
    return PropertySuiteService(pd=build_problem(config), cfg=build_solver_config(config))
