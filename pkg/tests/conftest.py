"""
Configuración de Tests
======================

Fixtures compartidas: bases espectrales, grafos, problemas de referencia y
un repositorio de resultados sobre un directorio temporal.
"""

import logging
import os
import sys

import numpy as np
import pytest

# Agregar el directorio src al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from phasefield.core.environment import get_settings
from phasefield.services.galerkin_solver import SolverConfig, TimeScheme
from phasefield.services.monotone_graph import graph_from_name
from phasefield.services.problem import (
    InitialData,
    ProblemData,
    ProblemParams,
    constant_profile,
    cosine_profile,
    linear_nonlinearity,
    obstacle_well,
)
from phasefield.services.spectral_basis import BoxDomain, build_basis


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    """Cada test ve una configuración limpia y escribe logs/salidas en tmp"""
    monkeypatch.setenv("PHASEFIELD_OUTPUT_DIR", str(tmp_path / "outputs"))
    monkeypatch.setenv("PHASEFIELD_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("PHASEFIELD_DEBUG", raising=False)
    # setup_logging corta la propagación; caplog escucha en la raíz
    monkeypatch.setattr(logging.getLogger("phasefield"), "propagate", True)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


# ============================================================================
# Bases y dominios
# ============================================================================

@pytest.fixture(scope="session")
def unit_interval():
    return BoxDomain((1.0,))


@pytest.fixture(scope="session")
def basis_1d(unit_interval):
    """Base de 12 modos sobre [0, 1]"""
    return build_basis(unit_interval, 12)


@pytest.fixture(scope="session")
def basis_2d():
    """Base 6×5 sobre [0, 1]×[0, 1.5]"""
    return build_basis(BoxDomain((1.0, 1.5)), (6, 5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ============================================================================
# Grafos y problemas
# ============================================================================

@pytest.fixture(params=["double_obstacle", "power", "linear", "zero"])
def catalog_graph(request):
    params = {"double_obstacle": {"lower": -1.0, "upper": 1.0}, "power": {"exponent": 3}, "linear": {"slope": 2.0}}
    return graph_from_name(request.param, **params.get(request.param, {}))


@pytest.fixture
def smooth_pd(unit_interval):
    """Grafo potencia 3, g lineal, datos coseno"""
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=0.5, eps=1e-2, t_final=0.1),
        domain=unit_interval,
        graph=graph_from_name("power", exponent=3),
        nl=linear_nonlinearity(1.0),
        init=InitialData(
            w0=cosine_profile(0.2, (2,), unit_interval.lengths),
            v0=constant_profile(0.0),
            u0=cosine_profile(0.5, (1,), unit_interval.lengths),
        ),
    )


@pytest.fixture
def obstacle_pd(unit_interval):
    """Doble obstáculo con pozos en ±1"""
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=1.0, eps=1e-2, t_final=0.05),
        domain=unit_interval,
        graph=graph_from_name("double_obstacle", lower=-1.0, upper=1.0),
        nl=obstacle_well(),
        init=InitialData(
            w0=cosine_profile(0.2, (2,), unit_interval.lengths),
            u0=cosine_profile(0.9, (1,), unit_interval.lengths),
        ),
    )


@pytest.fixture
def euler_cfg():
    return SolverConfig(n_modes=8, dt=1e-2, scheme=TimeScheme.IMEX_EULER)


@pytest.fixture
def cn_cfg():
    return SolverConfig(n_modes=8, dt=1e-2, scheme=TimeScheme.IMEX_CN)


# ============================================================================
# Repositorio y configuraciones
# ============================================================================

@pytest.fixture
def result_repository():
    from phasefield.repositories.result_repository import ResultRepository
    return ResultRepository()


@pytest.fixture
def minimal_config_text():
    return '{"domain": {"lengths": [1.0]}}'


@pytest.fixture
def write_config(tmp_path):
    """Escribe un archivo de configuración y devuelve su ruta"""
    def _write(text: str, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
