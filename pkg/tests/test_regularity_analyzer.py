"""Trajectory restriction, slope estimation, and the two interior checks."""

import math

import numpy as np
import pytest

import symplap.function_spaces as fs
import symplap.pde_solver as ps
import symplap.regularity_analyzer as ra
import symplap.tensor_models as tm
from symplap.errors import (GeometryError, InsufficientResolutionError,
                            PreconditionError)

LINEAR = tm.ModelParams(p=2, mu=1.0, model="A2")
P3 = tm.ModelParams(p=3, mu=1.0, model="A2")

CENTER = (math.pi, math.pi, 1.0)
CYL = ra.SubCylinder(center=CENTER, r=0.85)


@pytest.fixture(scope="module")
def p2_traj():
    grid = ps.TorusGrid(16)
    u0 = ps.initial_condition("eigenfield", grid)
    return ps.solve(u0, 2.0, 0.01, LINEAR, meta={"ic": "eigenfield"})


@pytest.fixture(scope="module")
def p3_traj():
    grid = ps.TorusGrid(16)
    u0 = ps.initial_condition("random_smooth", grid, seed=8)
    return ps.solve(u0, 2.0, 0.01, P3, meta={"ic": "random_smooth"})


@pytest.fixture(scope="module")
def zero_traj():
    grid = ps.TorusGrid(16)
    return ps.solve(ps.SpatialField.zero(grid), 2.0, 0.01, LINEAR, meta={"ic": "zero"})


class TestRestrict:
    def test_zero_trajectory_restricts_to_zero(self, zero_traj):
        f = ra.restrict(zero_traj, CYL)
        assert np.all(f.values == 0.0)
        assert f.geometry.mask is not None

    def test_restricted_norm_below_full_norm(self, p2_traj):
        f_ball = ra.restrict(p2_traj, CYL)
        full = ra.SubCylinder(center=CENTER, r=2.4, time_halfwidth=CYL.halfwidth)
        f_full = ra.restrict(p2_traj, full)
        for k in range(f_ball.n_samples):
            nb = fs.spatial_norm(f_ball.values[k], fs.L2, f_ball.geometry)
            nf = fs.spatial_norm(f_full.values[k], fs.L2, f_full.geometry)
            assert nb <= nf * (1 + 1e-12)

    def test_ball_point_count_matches_enumeration(self, p2_traj):
        grid = p2_traj.grid
        count = ra.ball_point_count(p2_traj, CYL)
        brute = 0
        for i in range(grid.n):
            for j in range(grid.n):
                d1 = abs(i * grid.h - CENTER[0])
                d2 = abs(j * grid.h - CENTER[1])
                d1 = min(d1, 2 * math.pi - d1)
                d2 = min(d2, 2 * math.pi - d2)
                if d1**2 + d2**2 <= CYL.r**2 * (1 + 1e-12):
                    brute += 1
        assert count == brute > 0

    def test_margin_violations_raise(self, p2_traj):
        with pytest.raises(GeometryError):
            ra.restrict(p2_traj, ra.SubCylinder(center=(math.pi, math.pi, 0.3), r=0.85))
        with pytest.raises(GeometryError):
            ra.restrict(p2_traj, ra.SubCylinder(center=CENTER, r=3.0,
                                                time_halfwidth=0.5))

    def test_vmap_target_applied_pointwise(self, p3_traj):
        f = ra.restrict(p3_traj, CYL, target="vmap")
        k = 5
        du = ra.sym_gradient4(p3_traj.snapshots, p3_traj.grid)
        t0_index = round(f.t0 / p3_traj.dt)
        expect = tm.v_map(du[t0_index + k], p3_traj.model)
        assert np.array_equal(f.values[k], expect)


class TestEstimateExponent:
    def test_linear_function_slope_exact(self):
        h = [2**-k for k in range(4, 10)]
        norms = h  # |D_h t|_inf = h exactly
        alpha, r_sq = ra.estimate_exponent(h, norms)
        assert alpha == pytest.approx(1.0, abs=1e-6)
        assert r_sq == pytest.approx(1.0, abs=1e-12)

    def test_kink_exponent_recovery(self):
        n = 2**12 + 1
        t = np.linspace(0.0, 1.0, n)
        for beta in (0.25, 0.5, 0.75):
            f = fs.TimeGridFunction(np.abs(t - 0.5) ** beta, 0.0, t[1] - t[0])
            ctx = fs._NormContext(f, fs.EUCLID)
            ks = [2**j for j in range(1, 7)]
            norms = [ctx.difference_norm(1, k, math.inf) for k in ks]
            alpha, _ = ra.estimate_exponent([k * f.dt for k in ks], norms)
            assert alpha == pytest.approx(beta, abs=0.05)

    def test_constant_gives_inf_sentinel(self):
        alpha, r_sq = ra.estimate_exponent([0.1, 0.2, 0.4, 0.8], [0.0, 0.0, 0.0, 0.0])
        assert math.isinf(alpha)

    def test_too_few_points_rejected(self):
        with pytest.raises(InsufficientResolutionError):
            ra.estimate_exponent([0.1, 0.2, 0.4], [1, 2, 3])


class TestSweep:
    def test_stationary_trajectory_all_zero(self, zero_traj):
        rows = ra.seminorm_sweep(zero_traj, CYL, alphas=[0.5], delta=0.16)
        for row in rows:
            assert all(s == 0.0 for s in row.seminorms)
            assert math.isinf(row.alpha_hat)

    def test_analytic_trajectory_saturates_at_difference_order(self, p2_traj):
        # the r = 1 slope caps at 1, the r = 2 slope at 2 (r > alpha needed)
        table = [("u", fs.L2, math.inf, 0.5), ("u", fs.L2, math.inf, 1.5)]
        rows = ra.seminorm_sweep(p2_traj, CYL, alphas=[0.4], delta=0.16, table=table)
        assert rows[0].r == 1 and rows[1].r == 2
        assert rows[0].alpha_hat == pytest.approx(1.0, abs=0.05)
        assert rows[1].alpha_hat == pytest.approx(2.0, abs=0.08)

    def test_nesting_monotonicity(self, p3_traj):
        small = ra.SubCylinder(center=CENTER, r=0.6, time_halfwidth=0.5)
        big = ra.SubCylinder(center=CENTER, r=1.0, time_halfwidth=0.7)
        rows_small = ra.seminorm_sweep(p3_traj, small, alphas=[0.3, 0.6], delta=0.2)
        rows_big = ra.seminorm_sweep(p3_traj, big, alphas=[0.3, 0.6], delta=0.2)
        for rs, rb in zip(rows_small, rows_big):
            if rs.lower_bound_norm:
                continue  # dictionary bounds are not monotone by construction
            for s_small, s_big in zip(rs.seminorms, rb.seminorms):
                assert s_small <= s_big * (1 + 1e-10)

    def test_insufficient_dyadic_resolution(self, p2_traj):
        with pytest.raises(InsufficientResolutionError):
            ra.seminorm_sweep(p2_traj, CYL, alphas=[0.5], delta=0.05)

    def test_vmap_consistency_bit_exact(self, p3_traj):
        assert ra.vmap_consistency_gap(p3_traj, CYL, k=3) == 0.0


class TestBallEstimate:
    def test_zero_trajectory_trivial(self, zero_traj):
        rep = ra.check_caccioppoli(zero_traj, (math.pi, math.pi), 0.85, 1.7)
        assert rep.lhs == 0.0
        assert rep.observed_constant == 0.0

    def test_lhs_independent_of_outer_radius(self, p2_traj):
        rep1 = ra.check_caccioppoli(p2_traj, (math.pi, math.pi), 0.85, 1.7)
        rep2 = ra.check_caccioppoli(p2_traj, (math.pi, math.pi), 0.85, 2.2)
        assert rep1.lhs == rep2.lhs

    def test_shrinking_gap_scales_rhs(self, p2_traj):
        # halving R - r quadruples the prefactor rhs/rhs_sup exactly, and the
        # lhs is untouched (it never sees R); the outer sup integral itself
        # may shrink with the smaller ball
        rep_wide = ra.check_caccioppoli(p2_traj, (math.pi, math.pi), 0.85, 1.85)
        rep_narrow = ra.check_caccioppoli(p2_traj, (math.pi, math.pi), 0.85, 1.35)
        assert rep_narrow.lhs == rep_wide.lhs
        prefactor_ratio = (rep_narrow.rhs / rep_narrow.rhs_sup) / (rep_wide.rhs / rep_wide.rhs_sup)
        assert prefactor_ratio == pytest.approx(4.0, rel=1e-12)
        assert rep_narrow.rhs_sup <= rep_wide.rhs_sup

    def test_estimate_holds_for_smooth_runs(self, p2_traj, p3_traj):
        from symplap.baselines import CACCIOPPOLI_CONSTANT
        for traj in (p2_traj, p3_traj):
            rep = ra.check_caccioppoli(traj, (math.pi, math.pi), 0.85, 1.7)
            assert rep.hypothesis_flag == "ok"
            assert rep.passed(CACCIOPPOLI_CONSTANT)

    def test_kink_run_flagged_not_failed(self):
        grid = ps.TorusGrid(16)
        u0 = ps.initial_condition("kink", grid)
        traj = ps.solve(u0, 0.4, 0.01, P3, meta={"ic": "kink"})
        rep = ra.check_caccioppoli(traj, (math.pi, math.pi), 0.85, 1.7)
        assert "unverified" in rep.hypothesis_flag

    def test_nested_ball_validation(self, p2_traj):
        with pytest.raises(GeometryError):
            ra.check_caccioppoli(p2_traj, (math.pi, math.pi), 1.7, 0.85)


class TestInteriorEstimate:
    def test_alpha_above_ceiling_rejected(self, p2_traj):
        with pytest.raises(PreconditionError):
            ra.check_seminorm_bounds(p2_traj, CYL,
                                     ra.SubCylinder(center=CENTER, r=1.7,
                                                    time_halfwidth=CYL.halfwidth),
                                     alpha=1.6)

    def test_zero_trajectory_trivially_bounded(self, zero_traj):
        outer = ra.SubCylinder(center=CENTER, r=1.7, time_halfwidth=CYL.halfwidth)
        rep = ra.check_seminorm_bounds(zero_traj, CYL, outer, alpha=1.4, delta=0.16)
        assert all(v == 0.0 for v in rep.norms.values())
        assert rep.bundle == pytest.approx(1.0 / (1.7 - 0.85))

    def test_interior_report_structure(self, p2_traj):
        outer = ra.SubCylinder(center=CENTER, r=1.7, time_halfwidth=CYL.halfwidth)
        rep = ra.check_seminorm_bounds(p2_traj, CYL, outer, alpha=1.4, delta=0.16)
        assert rep.case == "heat"
        assert all(math.isfinite(v) for v in rep.norms.values())
        assert rep.bundle > 1.0
        assert math.isfinite(rep.kappa_hat)

    def test_refinement_stability(self):
        grid = ps.TorusGrid(16)
        u0 = ps.initial_condition("eigenfield", grid)
        coarse = ps.solve(u0, 2.0, 0.01, LINEAR)
        fine = ps.solve(u0, 2.0, 0.005, LINEAR)
        outer = ra.SubCylinder(center=CENTER, r=1.7, time_halfwidth=CYL.halfwidth)
        rep = ra.check_seminorm_bounds(coarse, CYL, outer, alpha=1.4, delta=0.16,
                                       traj_fine=fine)
        assert rep.stable
        assert all(g < 1.5 for g in rep.growth_factors.values())

    def test_full_derivative_case_at_smooth_data(self, p3_traj):
        # p = 3 in two dimensions sits below the regime threshold, so the
        # full-derivative table applies up to gamma1 = 25/24; alpha = 0.9 works
        import symplap.exponent_engine as ee
        assert ee.gamma1(3, 2) == pytest.approx(25 / 24)
        outer = ra.SubCylinder(center=CENTER, r=1.7, time_halfwidth=CYL.halfwidth)
        rep = ra.check_seminorm_bounds(p3_traj, CYL, outer, alpha=0.9, delta=0.16)
        assert rep.case == "full_derivative"
        assert len(rep.norms) == 6
        assert all(math.isfinite(v) and v >= 0 for v in rep.norms.values())

    def test_fractional_regime_table(self):
        # p = 4, d = 2 is in the fractional regime (ceiling gamma0 = 1/2)
        grid = ps.TorusGrid(16)
        model = tm.ModelParams(p=4, mu=1.0, model="A2")
        u0 = ps.initial_condition("random_smooth", grid, seed=4)
        traj = ps.solve(u0, 2.0, 0.01, model, meta={"ic": "random_smooth"})
        rows = ra.seminorm_sweep(traj, CYL, alphas=[0.3], delta=0.16)
        assert len(rows) == 6
        labels = {(r.target, r.x_label) for r in rows}
        assert ("vmap", "L2") in labels
        assert any(lab.startswith("Wm1_") for _, lab in labels)
        # smooth data clears the fractional predictions with room
        for row in rows:
            assert row.alpha_hat >= row.predicted - 0.15
        outer = ra.SubCylinder(center=CENTER, r=1.7, time_halfwidth=CYL.halfwidth)
        rep = ra.check_seminorm_bounds(traj, CYL, outer, alpha=0.45, delta=0.16)
        assert rep.case == "fractional"
        with pytest.raises(PreconditionError):
            ra.check_seminorm_bounds(traj, CYL, outer, alpha=0.55, delta=0.16)
