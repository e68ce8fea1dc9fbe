"""
Tests de la suite de propiedades (propiedades baratas de forma aislada)
"""
import numpy as np
import pytest

from phasefield.core.exceptions import PhaseFieldError
from phasefield.services.property_suite import (
    PropertySuiteService,
    _yosida_violations,
    catalog_graphs,
    run_property_suite,
    smooth_problem,
)


@pytest.mark.unit
class TestPropertySuiteService:

    @pytest.mark.parametrize("name", [
        "yosida_catalog",
        "basis_invariants",
        "equilibrium",
        "convolution",
        "rate_fit_sanity",
    ])
    def test_cheap_properties_pass(self, name):
        report = PropertySuiteService().run([name])
        assert [r.name for r in report.results] == [name]
        assert report.passed, report.results[0].details

    def test_unknown_property(self):
        with pytest.raises(PhaseFieldError):
            PropertySuiteService().run(["does_not_exist"])

    def test_registry_order(self):
        names = list(PropertySuiteService().properties)
        assert names[0] == "yosida_catalog"
        assert "free_energy_dissipation" in names

    def test_failure_is_reported_not_raised(self):
        service = PropertySuiteService()

        def broken():
            raise PhaseFieldError("broken property")

        service.properties["broken"] = broken
        report = service.run(["broken"])
        assert not report.passed
        assert report.results[0].details["error"]["message"] == "broken property"

    def test_functional_entry_point(self):
        assert run_property_suite(selected=["convolution"]).passed


@pytest.mark.unit
class TestHelpers:

    def test_catalog_has_one_graph_per_entry(self):
        assert [g.name for g in catalog_graphs()] == ["double_obstacle", "power", "linear", "zero"]

    def test_no_violations_on_dense_sample(self):
        s = np.linspace(-3.0, 3.0, 3001)
        for graph in catalog_graphs():
            assert _yosida_violations(graph, 1e-2, s) == 0

    def test_smooth_problem(self):
        pd = smooth_problem(t_final=0.3)
        assert pd.params.t_final == 0.3
        assert pd.graph.is_single_valued
