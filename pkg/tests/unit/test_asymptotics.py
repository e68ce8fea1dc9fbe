"""
Tests de ajuste de órdenes y planes de barrido
"""
import numpy as np
import pytest

from phasefield.core.exceptions import MMSConfigurationError, SweepError
from phasefield.schemas.reports import LevelResult, RateReport
from phasefield.services.asymptotics import (
    PerturbationRule,
    SweepParameter,
    SweepPlan,
    fit_rate,
    geometric_ladder,
    mms_verify,
    scheme_order,
    slope_gate,
)
from phasefield.services.galerkin_solver import SolverConfig, TimeScheme, basis_for
from phasefield.services.manufactured import default_manufactured
from phasefield.services.monotone_graph import PowerGraph
from phasefield.services.problem import ProblemData, ProblemParams, linear_nonlinearity

BETA_LADDER = (1e-1, 2.5e-2, 6.25e-3, 1.5625e-3)


def _report(values, channel="stimaerr1"):
    levels = [LevelResult(index=i, value=b, channels={channel: v}) for i, (b, v) in enumerate(zip(BETA_LADDER, values))]
    return RateReport(
        parameter="beta",
        ladder=list(BETA_LADDER),
        levels=levels,
        fits={channel: fit_rate(BETA_LADDER, values)},
    )


@pytest.mark.unit
class TestFitRate:

    @pytest.mark.parametrize("p", [0.5, 1.0, 1.37, 2.0])
    def test_recovers_power_law(self, p):
        beta = np.array(BETA_LADDER)
        fit = fit_rate(beta, 0.42 * beta ** p)
        assert fit.slope == pytest.approx(p, abs=1e-10)
        assert fit.residual <= 1e-10
        assert fit.n_points == 4
        assert fit.valid

    def test_ignores_non_positive_and_nan(self):
        beta = np.array(BETA_LADDER + (1e-4,))
        err = beta.copy()
        err[1] = 0.0
        err[2] = np.nan
        fit = fit_rate(beta, err)
        assert fit.n_points == 3
        assert fit.slope == pytest.approx(1.0)

    def test_too_few_points(self):
        fit = fit_rate([1e-1, 1e-2, 1e-3], [1.0, 0.0, np.nan])
        assert fit.slope is None
        assert not fit.valid

    def test_length_mismatch(self):
        with pytest.raises(SweepError):
            fit_rate([1.0, 2.0], [1.0])

    def test_geometric_ladder(self):
        assert geometric_ladder(0.1, 0.25, 4) == pytest.approx(BETA_LADDER)
        with pytest.raises(SweepError):
            geometric_ladder(0.1, 0.0, 3)


@pytest.mark.unit
class TestSlopeGate:

    def test_linear_rate_passes(self):
        assert slope_gate(_report([3.0 * b for b in BETA_LADDER]), "stimaerr1")

    def test_square_root_rate_fails(self):
        assert not slope_gate(_report([np.sqrt(b) for b in BETA_LADDER]), "stimaerr1")

    def test_superconvergence_passes(self):
        assert slope_gate(_report([b ** 2 for b in BETA_LADDER]), "stimaerr1")

    def test_round_off_differences_pass(self):
        assert slope_gate(_report([0.0, 1e-14, 0.0, 1e-13]), "stimaerr1")

    def test_missing_channel_fails(self):
        assert not slope_gate(_report([3.0 * b for b in BETA_LADDER]), "stimaerr2")

    def test_slopes_summarize_fits(self):
        report = _report([3.0 * b for b in BETA_LADDER])
        assert list(report.slopes) == ["stimaerr1"]
        assert report.slopes["stimaerr1"] == pytest.approx(1.0)


@pytest.mark.unit
class TestSweepPlan:

    @pytest.fixture
    def pd(self, smooth_pd):
        return smooth_pd

    def test_geometric_constructor(self, pd, euler_cfg):
        plan = SweepPlan.geometric("beta", 0.1, 0.25, 4, pd, euler_cfg)
        assert plan.parameter is SweepParameter.BETA
        assert plan.ladder == pytest.approx(BETA_LADDER)

    @pytest.mark.parametrize("parameter,ladder", [
        ("beta", (0.1, 0.01)),
        ("beta", (0.01, 0.1, 1.0)),
        ("eps", (0.1, 0.1, 0.01)),
        ("n_modes", (16, 8, 4)),
    ])
    def test_rejects_bad_ladders(self, pd, euler_cfg, parameter, ladder):
        with pytest.raises(SweepError):
            SweepPlan(parameter=parameter, ladder=ladder, pd=pd, cfg=euler_cfg)

    def test_rejects_zero_threads(self, pd, euler_cfg):
        with pytest.raises(SweepError):
            SweepPlan(parameter="beta", ladder=BETA_LADDER, pd=pd, cfg=euler_cfg, threads=0)


@pytest.mark.unit
class TestPerturbationRule:

    def test_unknown_component(self):
        with pytest.raises(SweepError):
            PerturbationRule(components=frozenset({"q"}))

    def test_position_follows_beta_when_violating(self, unit_interval):
        basis = basis_for(unit_interval, SolverConfig(n_modes=16))
        rule = PerturbationRule(violate_uniform_bound=True)
        position = rule.position_for(basis, 1.0 / basis.eigenvalues[5])
        assert position == 5
        assert PerturbationRule(mode_position=3).position_for(basis, 0.01) == 3

    def test_apply_scales_with_beta(self, smooth_pd, unit_interval):
        basis = basis_for(unit_interval, SolverConfig(n_modes=8))
        rule = PerturbationRule(components=frozenset({"u"}))
        perturbed = rule.apply(smooth_pd, basis, 0.1)
        diff = basis.project(perturbed.init.grid("u0", basis) - smooth_pd.init.grid("u0", basis))
        assert diff[1] == pytest.approx(0.1)
        assert np.allclose(np.delete(diff, 1), 0.0, atol=1e-12)
        assert perturbed.forcing is smooth_pd.forcing

    def test_no_perturbation_at_reference(self, smooth_pd, unit_interval):
        basis = basis_for(unit_interval, SolverConfig(n_modes=8))
        assert PerturbationRule().apply(smooth_pd, basis, 0.0) is smooth_pd
        assert PerturbationRule(enabled=False).apply(smooth_pd, basis, 0.1) is smooth_pd


@pytest.mark.unit
class TestMMSSetup:

    def test_scheme_order(self):
        assert scheme_order(TimeScheme.IMEX_EULER) == 1
        assert scheme_order("imex_cn") == 2

    def test_dt_must_divide_t_final(self, unit_interval):
        template = ProblemData(ProblemParams(t_final=1.0), unit_interval, graph=PowerGraph(3), nl=linear_nonlinearity())
        with pytest.raises(MMSConfigurationError):
            mms_verify(default_manufactured(), template, SolverConfig(n_modes=4), ladder=(0.3, 0.2, 0.1))

    def test_unknown_refinement(self, unit_interval):
        template = ProblemData(ProblemParams(), unit_interval, graph=PowerGraph(3))
        with pytest.raises(MMSConfigurationError):
            mms_verify(default_manufactured(), template, SolverConfig(), ladder=(0.1, 0.05, 0.025), refine="space")
