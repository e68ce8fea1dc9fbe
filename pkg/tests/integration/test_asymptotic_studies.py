"""
Tests de Integración de los Estudios Asintóticos
================================================

Barridos completos (solver + diagnósticos + ajuste) sobre problemas pequeños.
"""
import dataclasses

import numpy as np
import pytest

from phasefield.services.asymptotics import (
    PerturbationRule,
    SweepPlan,
    beta_sweep,
    eps_sweep,
    gronwall_response,
    mms_verify,
    refinement_sweep,
)
from phasefield.services.galerkin_solver import SolverConfig, TimeScheme
from phasefield.services.manufactured import default_manufactured
from phasefield.services.monotone_graph import DoubleObstacleGraph, PowerGraph
from phasefield.services.problem import (
    InitialData,
    ProblemData,
    ProblemParams,
    cosine_profile,
    linear_nonlinearity,
    obstacle_well,
)
from phasefield.services.property_suite import smooth_problem

BETA_LADDER = (1e-1, 2.5e-2, 6.25e-3, 1.5625e-3)


@pytest.fixture
def mms_template(unit_interval):
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=1.0, t_final=1.0),
        domain=unit_interval,
        graph=PowerGraph(3),
        nl=linear_nonlinearity(1.0),
    )


@pytest.mark.integration
class TestManufacturedConvergence:

    @pytest.mark.parametrize("scheme,ladder", [
        (TimeScheme.IMEX_EULER, (1 / 40, 1 / 80, 1 / 160, 1 / 320)),
        (TimeScheme.IMEX_CN, (1 / 40, 1 / 80, 1 / 160, 1 / 320)),
    ])
    def test_observed_order_matches_scheme(self, mms_template, scheme, ladder):
        cfg = SolverConfig(n_modes=8, scheme=scheme)
        report = mms_verify(default_manufactured(), mms_template, cfg, ladder=ladder, refine="dt", threads=2)
        assert report.failures == []
        assert report.gates["order"], report.fits["total_error"]
        errors = report.channel("total_error")
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert report.metadata["expected_order"] == (2 if scheme is TimeScheme.IMEX_CN else 1)

    def test_spatial_refinement_has_no_gate(self, mms_template):
        cfg = SolverConfig(n_modes=8, dt=1 / 40)
        report = mms_verify(default_manufactured(), mms_template, cfg, ladder=(4, 8, 12), refine="n_modes")
        assert report.parameter == "n_modes"
        assert report.gates == {}
        assert len(report.levels) == 3


@pytest.mark.integration
class TestBetaSweep:

    @pytest.fixture
    def plan(self):
        return SweepPlan(
            parameter="beta",
            ladder=BETA_LADDER,
            pd=smooth_problem(t_final=0.5),
            cfg=SolverConfig(n_modes=8, dt=1e-2),
            perturbation=PerturbationRule(),
            threads=2,
        )

    def test_linear_rate_in_beta(self, plan):
        report = beta_sweep(plan)
        assert report.failures == []
        assert report.reference == 0.0
        assert set(report.gates) == {"stimaerr1_slope", "estimate_1_uniform_in_beta"}
        slope = report.fits["stimaerr1"].slope
        assert 0.8 <= slope <= 1.3
        assert "reference_monitor" in report.metadata

    def test_thread_count_does_not_change_results(self, plan):
        serial = beta_sweep(dataclasses.replace(plan, threads=1))
        parallel = beta_sweep(plan)
        for a, b in zip(serial.levels, parallel.levels):
            assert a.index == b.index
            assert a.channels == pytest.approx(b.channels, rel=1e-12, abs=0.0)

    def test_violated_data_bound_is_recorded(self, plan):
        rule = PerturbationRule(violate_uniform_bound=True)
        report = beta_sweep(dataclasses.replace(plan, perturbation=rule), gate_channels=("stimaerr1", "stimaerr2"))
        assert report.metadata["perturbation"]["violate_uniform_bound"] is True
        assert "stimaerr2_slope" in report.gates


@pytest.mark.integration
class TestEpsSweep:

    def test_overshoot_shrinks_with_eps(self, unit_interval):
        pd = ProblemData(
            params=ProblemParams(alpha=1.0, beta=0.1, t_final=0.5),
            domain=unit_interval,
            graph=DoubleObstacleGraph(-1.0, 1.0),
            nl=obstacle_well(),
            init=InitialData(u0=cosine_profile(0.05, (1,), unit_interval.lengths, offset=0.95)),
        )
        plan = SweepPlan(parameter="eps", ladder=(1e-1, 3e-2, 1e-2), pd=pd, cfg=SolverConfig(n_modes=4, dt=1e-3))
        report = eps_sweep(plan)
        assert report.reference == 1e-2
        assert report.gates["overshoot_decreasing"]
        overshoot = [level.monitor["overshoot_Linf_Q"] for level in report.levels]
        assert overshoot[0] > overshoot[-1] > 0.0
        assert max(report.levels[-1].channels.values()) == 0.0


@pytest.mark.integration
class TestRefinementAndStability:

    @pytest.mark.parametrize("parameter,ladder", [("n_modes", (4, 8, 16)), ("dt", (0.02, 0.01, 0.005))])
    def test_self_convergence(self, parameter, ladder):
        plan = SweepPlan(
            parameter=parameter,
            ladder=ladder,
            pd=smooth_problem(t_final=0.1),
            cfg=SolverConfig(n_modes=8, dt=0.005),
        )
        report = refinement_sweep(plan)
        assert report.failures == []
        assert report.levels[-1].channels["total_final_L2"] == 0.0
        assert report.levels[0].channels["total_final_L2"] > 0.0

    def test_gronwall_linear_response(self):
        response = gronwall_response(smooth_problem(), SolverConfig(n_modes=8, dt=1e-2, scheme=TimeScheme.IMEX_CN))
        assert response.deterministic
        assert response.stable(0.1)
        assert np.all(np.asarray(response.output_norms) > 0.0)
