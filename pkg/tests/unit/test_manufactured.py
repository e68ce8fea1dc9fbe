"""
Tests de soluciones manufacturadas
"""
import numpy as np
import pytest

from phasefield.core.exceptions import MMSConfigurationError
from phasefield.services.manufactured import ManufacturedSolution, default_manufactured
from phasefield.services.monotone_graph import DoubleObstacleGraph, PowerGraph
from phasefield.services.problem import ProblemData, ProblemParams, linear_nonlinearity
from phasefield.services.spectral_basis import BoxDomain


@pytest.fixture
def template(unit_interval):
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=0.5, t_final=1.0),
        domain=unit_interval,
        graph=PowerGraph(3),
        nl=linear_nonlinearity(1.0),
    )


@pytest.mark.unit
class TestManufacturedSolution:

    def test_balance_source(self, template):
        forcing = default_manufactured().forcing(template)
        x = np.linspace(0.0, 1.0, 7)
        t = 0.4
        c, e = np.cos(np.pi * x), np.exp(-t)
        expected = c * e * (1.0 - np.pi ** 2 + 0.5 * np.pi ** 2) + c
        assert np.allclose(forcing.f((x,), t), expected)

    def test_phase_source(self, template):
        forcing = default_manufactured().forcing(template)
        x = np.linspace(0.0, 1.0, 7)
        t = 0.4
        c = np.cos(np.pi * x)
        u = c * (1.0 + t)
        expected = c + np.pi ** 2 * u + u ** 3 + u + c * np.exp(-t)
        assert np.allclose(forcing.h((x,), t), expected)

    def test_problem_uses_unregularized_graph(self, template):
        pd = default_manufactured().problem(template)
        assert pd.params.regularize is False
        assert pd.forcing.name == "mms:cos_exp"

    def test_initial_data(self, template, basis_1d):
        init = default_manufactured().initial_data()
        x = basis_1d.coordinates[0]
        assert np.allclose(init.grid("w0", basis_1d), np.cos(np.pi * x))
        assert np.allclose(init.grid("v0", basis_1d), -np.cos(np.pi * x))
        assert np.allclose(init.grid("u0", basis_1d), np.cos(np.pi * x))

    def test_exact_grid(self, basis_1d):
        exact = default_manufactured().exact_grid(basis_1d, 1.0)
        x = basis_1d.coordinates[0]
        assert set(exact) == {"w", "v", "u"}
        assert np.allclose(exact["u"], 2.0 * np.cos(np.pi * x))
        assert np.allclose(exact["v"], -np.exp(-1.0) * np.cos(np.pi * x))

    def test_from_strings_matches_default(self, template):
        parsed = ManufacturedSolution.from_strings("cos(pi*x)*exp(-t)", "cos(pi*x)*(1 + t)")
        f_parsed, h_parsed = parsed.source_expressions(template)
        f_default, h_default = default_manufactured().source_expressions(template)
        assert (f_parsed - f_default).equals(0)
        assert (h_parsed - h_default).equals(0)

    def test_two_dimensional_solution(self):
        domain = BoxDomain((1.0, 1.0))
        template = ProblemData(ProblemParams(), domain, graph=PowerGraph(3), nl=linear_nonlinearity())
        solution = ManufacturedSolution.from_strings("cos(pi*x)*cos(pi*y)*exp(-t)", "cos(pi*y)", dim=2)
        forcing = solution.forcing(template)
        values = forcing.f((np.array([0.0]), np.array([0.0])), 0.0)
        assert values.shape == (1,)


@pytest.mark.unit
class TestManufacturedErrors:

    def test_rejects_multivalued_graph(self, unit_interval):
        template = ProblemData(ProblemParams(), unit_interval, graph=DoubleObstacleGraph())
        with pytest.raises(MMSConfigurationError) as exc_info:
            default_manufactured().problem(template)
        assert exc_info.value.code == "E401"

    def test_rejects_unparsable_expression(self):
        with pytest.raises(MMSConfigurationError):
            ManufacturedSolution.from_strings("cos(", "t")

    def test_rejects_dimension_mismatch(self, template):
        solution = ManufacturedSolution.from_strings("cos(pi*x)", "cos(pi*y)", dim=2)
        with pytest.raises(MMSConfigurationError):
            solution.problem(template)
