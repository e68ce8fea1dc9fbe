"""
Tests del solver de Faedo–Galerkin
"""
import dataclasses
import logging

import numpy as np
import pytest

from phasefield.core.exceptions import NewtonConvergenceError, PhaseFieldError, StepError, TrajectoryError
from phasefield.services.galerkin_solver import (
    GalerkinSolver,
    SolverConfig,
    State,
    TimeScheme,
    Trajectory,
    basis_for,
    project_initial_data,
    reconstruct_xi,
    residuals,
    solve,
    step,
)
from phasefield.services.diagnostics import difference_norms
from phasefield.services.monotone_graph import DoubleObstacleGraph, PowerGraph
from phasefield.services.problem import (
    InitialData,
    ProblemData,
    ProblemParams,
    constant_profile,
    cosine_profile,
    obstacle_well,
)
from phasefield.services.spectral_basis import BoxDomain


def _mode0_problem(t_final=1.0):
    """Datos constantes: solo evoluciona el modo 0 y hay solución cerrada"""
    return ProblemData(
        params=ProblemParams(alpha=1.0, beta=1.0, t_final=t_final),
        domain=BoxDomain((1.0,)),
        init=InitialData(constant_profile(0.3), constant_profile(0.7), constant_profile(-0.2)),
    )


@pytest.mark.unit
class TestSolverConfig:

    def test_scheme_from_string(self):
        assert SolverConfig(scheme="imex_cn").scheme is TimeScheme.IMEX_CN

    @pytest.mark.parametrize("changes", [{"dt": 0.0}, {"newton_tol": 0.0}, {"newton_max_iter": 0}, {"scheme": "rk4"}])
    def test_rejects_invalid(self, changes):
        with pytest.raises((PhaseFieldError, ValueError)):
            SolverConfig(**changes)


@pytest.mark.unit
class TestTrajectory:

    def _traj(self, times, dt=0.1):
        n = len(times)
        return Trajectory(times=times, w=np.zeros((n, 2)), v=np.zeros((n, 2)), u=np.zeros((n, 2)), dt=dt)

    def test_valid_trajectory_is_read_only(self):
        traj = self._traj([0.0, 0.1, 0.2])
        assert len(traj) == 3
        assert traj.n_coefficients == 2
        assert traj.final.t == pytest.approx(0.2)
        with pytest.raises(ValueError):
            traj.u[0, 0] = 1.0

    @pytest.mark.parametrize("times", [[0.0, 0.2, 0.1], [0.0, 0.1, 0.25], []])
    def test_rejects_bad_time_grids(self, times):
        with pytest.raises(TrajectoryError):
            self._traj(times)

    def test_slice(self):
        traj = self._traj([0.0, 0.1, 0.2, 0.3])
        assert len(traj.slice(1, 3)) == 2

    def test_state_lengths_must_agree(self):
        with pytest.raises(PhaseFieldError):
            State(w=np.zeros(2), v=np.zeros(3), u=np.zeros(2))


@pytest.mark.unit
class TestMode0Oracle:

    @pytest.mark.parametrize("scheme,order", [(TimeScheme.IMEX_EULER, 1), (TimeScheme.IMEX_CN, 2)])
    @pytest.mark.parametrize("dt", [1e-2, 1e-3])
    def test_matches_closed_form(self, scheme, order, dt):
        final = solve(_mode0_problem(), SolverConfig(n_modes=4, dt=dt, scheme=scheme)).final
        v_exact = 0.7 * np.exp(-1.0)
        u_exact = -0.2 + 0.7 * (1.0 - np.exp(-1.0))
        assert abs(final.v[0] - v_exact) <= 5 * dt ** order
        assert abs(final.u[0] - u_exact) <= 5 * dt ** order
        assert np.allclose(final.u[1:], 0.0, atol=1e-12)


@pytest.mark.unit
class TestGalerkinSolver:

    @pytest.mark.parametrize("scheme", list(TimeScheme))
    def test_rest_state_is_equilibrium(self, unit_interval, scheme):
        pd = ProblemData(ProblemParams(), unit_interval, init=InitialData(w0=constant_profile(0.8)))
        cfg = SolverConfig(n_modes=8, dt=1e-2, scheme=scheme)
        basis = basis_for(unit_interval, cfg)
        start = project_initial_data(pd.init, basis)
        new = step(start, pd, cfg, basis)
        for name in ("w", "v", "u"):
            assert np.max(np.abs(getattr(new, name) - getattr(start, name))) <= 1e-12
        assert new.t == pytest.approx(1e-2)

    def test_solve_shape_and_times(self, smooth_pd, euler_cfg):
        traj = GalerkinSolver(smooth_pd, euler_cfg).solve()
        assert len(traj) == 11
        assert traj.times[-1] == pytest.approx(0.1)
        assert traj.times[3] == 3 * euler_cfg.dt
        assert traj.metadata["scheme"] == "imex_euler"
        assert traj.metadata["n_steps"] == 10

    def test_deterministic(self, obstacle_pd, cn_cfg):
        a = solve(obstacle_pd, cn_cfg)
        b = solve(obstacle_pd, cn_cfg)
        for name in ("times", "w", "v", "u"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_limit_problem_runs(self, smooth_pd, cn_cfg):
        traj = solve(smooth_pd.with_params(beta=0.0), cn_cfg)
        assert traj.final.is_finite()
        assert traj.metadata["beta"] == 0.0

    def test_two_dimensional_run(self):
        domain = BoxDomain((1.0, 2.0))
        pd = ProblemData(
            ProblemParams(t_final=0.05),
            domain,
            graph=PowerGraph(3),
            init=InitialData(u0=cosine_profile(0.5, (1, 1), domain.lengths)),
        )
        traj = solve(pd, SolverConfig(n_modes=(4, 4), dt=1e-2))
        assert traj.n_coefficients == 16
        assert traj.final.is_finite()

    def test_freeze_thermal_keeps_w_fixed(self, obstacle_pd):
        cfg = SolverConfig(n_modes=8, dt=1e-2, freeze_thermal=True)
        traj = solve(obstacle_pd, cfg)
        assert np.all(traj.v[1:] == 0.0)
        assert np.array_equal(traj.w[-1], traj.w[0])
        assert not np.array_equal(traj.u[-1], traj.u[0])

    def test_newton_failure_reports_step(self, unit_interval):
        pd = ProblemData(
            ProblemParams(t_final=0.2),
            unit_interval,
            graph=PowerGraph(3),
            init=InitialData(u0=cosine_profile(5.0, (1,), unit_interval.lengths)),
        )
        cfg = SolverConfig(n_modes=8, dt=0.1, newton_max_iter=1)
        with pytest.raises(StepError) as exc_info:
            solve(pd, cfg)
        assert isinstance(exc_info.value.cause, NewtonConvergenceError)
        assert exc_info.value.code == "E301"
        assert exc_info.value.t == 0.0

    def test_t_final_shorter_than_dt(self, smooth_pd):
        with pytest.raises(PhaseFieldError):
            solve(smooth_pd, SolverConfig(n_modes=4, dt=1.0))

    def test_initial_state_override(self, smooth_pd, euler_cfg):
        solver = GalerkinSolver(smooth_pd, euler_cfg)
        start = project_initial_data(smooth_pd.init, solver.basis)
        shifted = dataclasses.replace(start, u=start.u * 0.5)
        traj = solver.solve(initial=shifted)
        assert np.array_equal(traj.u[0], shifted.u)

    def test_reconstruct_xi(self, obstacle_pd, euler_cfg):
        solver = GalerkinSolver(obstacle_pd, euler_cfg)
        state = solver.solve().final
        xi = reconstruct_xi(state, obstacle_pd, solver.basis)
        assert xi.shape == solver.basis.grid_shape
        assert np.allclose(xi, obstacle_pd.graph.yosida(1e-2, solver.basis.to_grid(state.u)))


@pytest.mark.unit
class TestResiduals:

    def test_residuals_shape(self, smooth_pd, euler_cfg):
        solver = GalerkinSolver(smooth_pd, euler_cfg)
        traj = solver.solve()
        res = residuals(traj, smooth_pd, solver.basis)
        assert len(res.times) == len(traj) - 2
        assert all(np.isfinite(value) for value in res.max())

    def test_needs_three_states(self, smooth_pd, euler_cfg):
        solver = GalerkinSolver(smooth_pd, euler_cfg)
        traj = solver.solve().slice(0, 2)
        with pytest.raises(TrajectoryError):
            residuals(traj, smooth_pd, solver.basis)

    def test_equilibrium_has_zero_residual(self, unit_interval):
        pd = ProblemData(ProblemParams(t_final=0.05), unit_interval, init=InitialData(w0=constant_profile(0.8)))
        solver = GalerkinSolver(pd, SolverConfig(n_modes=8, dt=1e-2))
        res = residuals(solver.solve(), pd, solver.basis)
        assert max(res.max()) <= 1e-10

    def test_residuals_shrink_with_dt(self, smooth_pd):
        coarse_solver = GalerkinSolver(smooth_pd, SolverConfig(n_modes=8, dt=1e-2))
        fine_solver = GalerkinSolver(smooth_pd, SolverConfig(n_modes=8, dt=2.5e-3))
        coarse = residuals(coarse_solver.solve(), smooth_pd, coarse_solver.basis).max()
        fine = residuals(fine_solver.solve(), smooth_pd, fine_solver.basis).max()
        for c, f in zip(coarse, fine):
            assert 0.0 < f <= 0.6 * c


@pytest.mark.unit
class TestLimitsAndBounds:

    def test_tiny_beta_is_close_to_limit_problem(self, smooth_pd, cn_cfg):
        solver = GalerkinSolver(smooth_pd.with_params(beta=0.0), cn_cfg)
        limit = solver.solve()
        tiny = solve(smooth_pd.with_params(beta=1e-8), cn_cfg)
        channels = difference_norms(tiny, limit, solver.basis)
        assert channels["stimaerr1"] <= 1e-6

    def test_obstacle_overshoot_matches_yosida_term(self, unit_interval):
        eps = 1e-3
        pd = ProblemData(
            params=ProblemParams(alpha=1.0, beta=1.0, eps=eps, t_final=0.05),
            domain=unit_interval,
            graph=DoubleObstacleGraph(-1.0, 1.0),
            nl=obstacle_well(),
            init=InitialData(u0=cosine_profile(0.05, (1,), unit_interval.lengths, offset=0.95)),
        )
        solver = GalerkinSolver(pd, SolverConfig(n_modes=8, dt=eps / 2))
        grid = np.stack([solver.basis.to_grid(u) for u in solver.solve().u])
        overshoot = float(np.max(np.maximum(np.abs(grid) - 1.0, 0.0)))
        xi_max = float(np.max(np.abs(pd.graph.yosida(eps, grid))))
        assert overshoot > 0.0
        assert overshoot <= eps * xi_max * (1.0 + 1e-9) + 1e-15

    def test_warns_when_dt_too_large_for_obstacle(self, obstacle_pd, euler_cfg, caplog):
        with caplog.at_level(logging.WARNING, logger="phasefield.services.galerkin_solver"):
            GalerkinSolver(obstacle_pd, euler_cfg)
        assert any("eps/2" in record.getMessage() for record in caplog.records)

    @pytest.mark.parametrize("fixture,dt", [("smooth_pd", 1e-2), ("obstacle_pd", 1e-3)])
    def test_no_warning_otherwise(self, request, fixture, dt, caplog):
        pd = request.getfixturevalue(fixture)
        with caplog.at_level(logging.WARNING, logger="phasefield.services.galerkin_solver"):
            GalerkinSolver(pd, SolverConfig(n_modes=8, dt=dt))
        assert not [r for r in caplog.records if "eps/2" in r.getMessage()]
