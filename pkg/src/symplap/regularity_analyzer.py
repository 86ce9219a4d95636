"""Regularity measurements of computed trajectories on interior sub-cylinders.

A trajectory is restricted to a parabolic sub-cylinder (ball times centered
time window of halfwidth r^2 by default), and its time regularity is probed
through the discrete seminorm machinery: for each state-space norm in the
regime's table, the difference norms |D_h^r u|_{L^p(X)} are computed over
dyadic steps h and a log-log slope estimate turns the decay rate into a
measured exponent.  "Membership" of a sampled trajectory in a smoothness
class is not decidable; its observable signatures are (a) the measured slope
and (b) stability of the seminorm values under time-grid refinement, and the
two interior checks below assert exactly those.

``check_seminorm_bounds`` evaluates every left-hand-side norm of the
applicable interior estimate on the inner cylinder, the data bundle
(1 + sup-L^2 norm + energy norm)/(R - r) on the outer one, and reports the
empirical exponent log(lhs)/log(bundle); the structural constants of the
estimate are existential, so assertions are finiteness, refinement stability
and a frozen-baseline comparison, never a literal constant.

``check_caccioppoli`` evaluates the stationary ball estimate: the sup over
time of the gradient energy of the square-root field inside the small ball
against (1 + 1/phi''(0))/(R-r)^2 times the sup of potential energy plus
squared time derivative over the large ball.  Its left side depends only on
the inner ball; the observed ratio is compared to a frozen constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exponent_engine as ee
from .errors import GeometryError, InsufficientResolutionError, PreconditionError
from .function_spaces import (L2, W12, SpaceGeometry, TimeGridFunction, XNorm,
                              _NormContext, lp, lp_norm, raw_seminorm, w1p, wm1p)
from .pde_solver import Trajectory, full_gradient, sym_gradient
from .tensor_models import frob, phi, v_map

INTERIOR_MARGIN = 0.1  # fraction of each domain extent kept clear around a cylinder


@dataclass(frozen=True)
class SubCylinder:
    """Parabolic space-time cylinder: ball of radius r times a time window.

    ``time_halfwidth`` defaults to r^2 (parabolic scaling).
    """

    center: tuple          # (x1, x2, t)
    r: float
    time_halfwidth: float | None = None

    @property
    def halfwidth(self) -> float:
        return self.r**2 if self.time_halfwidth is None else self.time_halfwidth

    def time_window(self):
        t = self.center[2]
        return t - self.halfwidth, t + self.halfwidth


def _ball_mask(grid, center_xy, r) -> np.ndarray:
    x1, x2 = grid.coordinates()
    extent = 2.0 * math.pi
    d1 = np.abs(x1 - center_xy[0])
    d2 = np.abs(x2 - center_xy[1])
    d1 = np.minimum(d1, extent - d1)
    d2 = np.minimum(d2, extent - d2)
    return d1**2 + d2**2 <= r**2 * (1 + 1e-12)


def _check_margins(traj: Trajectory, cyl: SubCylinder) -> None:
    extent = 2.0 * math.pi
    if cyl.r > (0.5 - INTERIOR_MARGIN) * extent:
        raise GeometryError(f"ball radius {cyl.r} leaves no interior margin on the torus")
    lo, hi = cyl.time_window()
    t_lo, t_hi = 0.0, traj.t_final
    pad = INTERIOR_MARGIN * (t_hi - t_lo)
    if lo < t_lo + pad - 1e-12 or hi > t_hi - pad + 1e-12:
        raise GeometryError(
            f"time window [{lo:g}, {hi:g}] violates the {INTERIOR_MARGIN:.0%} interior margin "
            f"of [0, {t_hi:g}]")


def ball_point_count(traj: Trajectory, cyl: SubCylinder) -> int:
    return int(np.sum(_ball_mask(traj.grid, cyl.center[:2], cyl.r)))


def restrict(traj: Trajectory, cyl: SubCylinder, target: str = "u") -> TimeGridFunction:
    """Time-sampled restriction to the sub-cylinder.

    ``target`` selects the solution itself ("u") or the square-root field of
    its symmetrized gradient ("vmap", applied pointwise snapshot by snapshot
    before any differencing).  The ball enters as a norm mask; gradients keep
    using the ambient periodic field.
    """
    _check_margins(traj, cyl)
    lo, hi = cyl.time_window()
    k_lo = int(math.ceil(lo / traj.dt - 1e-9))
    k_hi = int(math.floor(hi / traj.dt + 1e-9))
    if k_hi - k_lo < 1:
        raise GeometryError("time window contains fewer than two snapshots")
    values = traj.snapshots[k_lo : k_hi + 1]
    if target == "vmap":
        values = v_map(sym_gradient4(values, traj.grid), traj.model)
    elif target != "u":
        raise ValueError(f"unknown restriction target {target!r}")
    mask = _ball_mask(traj.grid, cyl.center[:2], cyl.r)
    if not mask.any():
        raise GeometryError(f"ball of radius {cyl.r} contains no grid nodes")
    geom = SpaceGeometry(h=traj.grid.h, ndim=2, mask=mask)
    return TimeGridFunction(values, t0=k_lo * traj.dt, dt=traj.dt, geometry=geom)


def sym_gradient4(snapshots: np.ndarray, grid) -> np.ndarray:
    """Symmetrized gradient of a whole snapshot stack: (m, n, n, 2) -> (m, n, n, 2, 2)."""
    g = np.empty(snapshots.shape + (2,))
    for j in range(2):
        g[..., j] = (np.roll(snapshots, -1, axis=1 + j) - np.roll(snapshots, 1, axis=1 + j)) / (2 * grid.h)
    return 0.5 * (g + np.swapaxes(g, -1, -2))


def estimate_exponent(h_values, norms):
    """Least-squares slope of log(norm) against log(h).

    Returns (alpha_hat, r_squared).  Exact constancy (all norms zero) is
    flagged with the +inf sentinel; individual zero entries are dropped.
    """
    h_values = np.asarray(h_values, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if len(h_values) < 4:
        raise InsufficientResolutionError("slope estimation needs at least 4 dyadic points")
    keep = norms > 0
    if not np.any(keep):
        return math.inf, 1.0
    if np.sum(keep) < 4:
        raise InsufficientResolutionError("fewer than 4 nonzero difference norms")
    x = np.log(h_values[keep])
    y = np.log(norms[keep])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_sq = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), r_sq


def dyadic_steps(f: TimeGridFunction, r: int, delta: float) -> list[int]:
    """Step multiples 2, 4, 8, ... with k*dt <= delta and a nonempty domain."""
    ks, k = [], 2
    while k * f.dt <= delta * (1 + 1e-12) and f.n_samples - r * k >= 2:
        ks.append(k)
        k *= 2
    return ks


@dataclass
class SweepRow:
    """Differences of one field in one state-space norm at one difference order."""

    target: str            # "u" or "vmap"
    x_label: str
    time_p: float
    r: int
    alpha_grid: list
    seminorms: list        # one per alpha, sup over the dyadic steps
    h_values: list
    diff_norms: list
    alpha_hat: float
    r_squared: float
    predicted: float | None = None
    lower_bound_norm: bool = False


def regime_norm_table(p: float, alpha: float) -> list:
    """State-space norms probed for a given growth exponent, with predictions.

    Entries are (target, x_norm, time_p, alpha_pred): the expected time
    differentiability of each listed norm at level ``alpha``.  The low-growth
    regimes replace the fractional rows by full-derivative rows (alpha_pred
    1 or 2), plus the square-root field's row.
    """
    regime = ee.classify(p, 2)
    pp = p / (p - 1.0)
    if regime is ee.Regime.FRACTIONAL:
        return [
            ("u", L2, math.inf, alpha),
            ("vmap", L2, 2.0, alpha),
            ("u", wm1p(pp), pp, 1.0 + alpha),
            ("u", W12, 2.0, alpha),
            ("u", lp(p), p, alpha),
            ("u", w1p(p), p, 2.0 * alpha / p),
        ]
    rows = [
        ("u", lp(p), p, alpha),
        ("u", wm1p(pp), pp, 2.0),
        ("u", L2, math.inf, 1.0),
        ("vmap", L2, 2.0, 1.0),
        ("u", W12, 2.0, 1.0),
    ]
    if p > 2:
        rows.append(("u", w1p(p), p, 2.0 / p))
    return rows


def seminorm_sweep(traj: Trajectory, cyl: SubCylinder, alphas, delta: float,
                   p: float | None = None, table=None) -> list[SweepRow]:
    """Measure every listed norm over the sub-cylinder.

    For each (target, X, time-p) entry: difference norms over dyadic steps at
    the natural order of the row's prediction, the slope estimate, and the
    seminorm sup for each alpha of the grid.  Requires at least 4 admissible
    dyadic steps.
    """
    p = traj.model.p if p is None else p
    alphas = list(alphas)
    if table is None:
        table = regime_norm_table(p, max(alphas))
    rows = []
    for target, x_norm, time_p, alpha_pred in table:
        f = restrict(traj, cyl, target=target)
        r = math.floor(alpha_pred + 1e-12) + 1  # difference order strictly above the prediction
        ks = dyadic_steps(f, r, delta)
        if len(ks) < 4:
            raise InsufficientResolutionError(
                f"only {len(ks)} dyadic steps fit below delta = {delta}")
        ctx = _NormContext(f, x_norm)
        h_values = [k * f.dt for k in ks]
        diffs = [ctx.difference_norm(r, k, time_p) for k in ks]
        alpha_hat, r_sq = estimate_exponent(h_values, diffs)
        semis = []
        for a in alphas:
            semis.append(max(h ** (-a) * d for h, d in zip(h_values, diffs)))
        rows.append(SweepRow(target=target, x_label=x_norm.label(), time_p=time_p,
                             r=r, alpha_grid=alphas, seminorms=semis,
                             h_values=h_values, diff_norms=diffs,
                             alpha_hat=alpha_hat, r_squared=r_sq,
                             predicted=alpha_pred,
                             lower_bound_norm=x_norm.is_lower_bound(f.geometry)))
    return rows


def _full_norm(f: TimeGridFunction, alpha: float, r: int, delta: float, p: float,
               x_norm: XNorm) -> float:
    ctx = _NormContext(f, x_norm)
    return raw_seminorm(f, alpha, r, delta, p, x_norm, _ctx=ctx) + ctx.lp_norm(p)


@dataclass
class InteriorEstimateReport:
    """Interior seminorm bound, measured.

    ``norms`` maps row labels to full Nikolskii/Sobolev-style norms of the
    solution (and of the square-root field) on the inner cylinder; ``bundle``
    is the outer data bundle; ``kappa_hat`` the empirical exponent.  When a
    refined trajectory is supplied, ``growth_factors`` holds the per-row
    ratio fine/coarse (finiteness proxy: below 1.5 when dt halves).
    """

    case: str
    alpha: float
    norms: dict
    bundle: float
    kappa_hat: float
    growth_factors: dict = field(default_factory=dict)
    stable: bool | None = None


def _interior_norms(traj: Trajectory, cyl: SubCylinder, alpha: float, delta: float) -> dict:
    p = traj.model.p
    out = {}
    for target, x_norm, time_p, alpha_pred in regime_norm_table(p, alpha):
        f = restrict(traj, cyl, target=target)
        label = f"{target}:{x_norm.label()}:p{time_p:g}"
        if alpha_pred == int(alpha_pred):
            # full-derivative row: first differences at unit weight per order
            order = int(alpha_pred)
            ctx = _NormContext(f, x_norm)
            total = ctx.lp_norm(time_p)
            for j in range(1, order + 1):
                total += ctx.difference_norm(j, 1, time_p) / f.dt**j
            out[label] = total
        else:
            r = math.floor(alpha_pred) + 1
            out[label] = _full_norm(f, alpha_pred, r, delta, time_p, x_norm)
    return out


def check_seminorm_bounds(traj: Trajectory, inner: SubCylinder, outer: SubCylinder,
                          alpha: float, delta: float | None = None,
                          traj_fine: Trajectory | None = None) -> InteriorEstimateReport:
    """Measure the interior estimate: inner-cylinder norms vs the outer data bundle.

    ``alpha`` must lie strictly below the regime's predicted ceiling (the
    estimate claims nothing above).  The outer bundle is
    (1 + sup_t L^2 + energy-norm)/(R - r); the constants of the bound being
    existential, the report records the empirical exponent and, when a
    dt-halved trajectory is given, the per-norm refinement growth factor.
    """
    p = traj.model.p
    regime = ee.classify(p, 2)
    ceiling = ee.gamma0(p, 2) if regime is ee.Regime.FRACTIONAL else ee.gamma1(p, 2)
    if alpha >= ceiling:
        raise PreconditionError(f"alpha = {alpha} is not below the predicted ceiling {ceiling}")
    if outer.r <= inner.r:
        raise GeometryError("outer cylinder must be strictly larger")
    if delta is None:
        delta = min(1.0, inner.halfwidth / 2.0)

    norms = _interior_norms(traj, cyl=inner, alpha=alpha, delta=delta)

    f_outer = restrict(traj, outer, target="u")
    sup_l2 = lp_norm(f_outer, math.inf, L2)
    energy_norm = lp_norm(f_outer, p, w1p(p))
    bundle = (1.0 + sup_l2 + energy_norm) / (outer.r - inner.r)
    total = sum(norms.values())
    kappa_hat = math.log(total) / math.log(bundle) \
        if total > 0 and abs(math.log(bundle)) > 1e-9 else math.nan

    report = InteriorEstimateReport(case=regime.value, alpha=alpha, norms=norms,
                                    bundle=bundle, kappa_hat=kappa_hat)
    if traj_fine is not None:
        fine = _interior_norms(traj_fine, cyl=inner, alpha=alpha, delta=delta)
        report.growth_factors = {k: fine[k] / norms[k] if norms[k] > 0 else 1.0 for k in norms}
        report.stable = all(g < 1.5 for g in report.growth_factors.values())
    return report


@dataclass
class BallEstimateReport:
    lhs: float
    rhs: float
    observed_constant: float
    rhs_sup: float = 0.0   # the outer-ball sup integral before the prefactor
    hypothesis_flag: str = "ok"

    def passed(self, frozen_constant: float) -> bool:
        return self.lhs <= frozen_constant * self.rhs


def check_caccioppoli(traj: Trajectory, center_xy, r: float, big_r: float) -> BallEstimateReport:
    """Stationary ball estimate on nested balls.

    lhs: sup over interior snapshots of the B_r integral of
    |grad vmap(Du)|^2 + phi''(0) |grad Du|^2;
    rhs: (1 + 1/phi''(0)) / (R-r)^2 times the sup over the same snapshots of
    the B_R integral of phi(|grad u|) + |u_t|^2, with u_t the backward divided
    difference the implicit stepper controls.  The observed lhs/rhs ratio is
    the quantity frozen as a regression baseline; lhs does not depend on R.

    Rough initial data (the ``kink`` tag) voids the bounded-time-derivative
    hypothesis; such runs are flagged, not failed.
    """
    if big_r <= r:
        raise GeometryError("need r < R")
    grid = traj.grid
    extent = 2.0 * math.pi
    if big_r > (0.5 - INTERIOR_MARGIN) * extent:
        raise GeometryError("outer ball leaves no interior margin")
    mask_r = _ball_mask(grid, center_xy, r)
    mask_R = _ball_mask(grid, center_xy, big_r)
    h2 = grid.h**2
    phi_dd0 = traj.model.phi_dd0

    lhs = 0.0
    rhs_sup = 0.0
    for k in range(1, traj.n_steps + 1):
        u = traj.snapshots[k]
        du = sym_gradient(u, grid)
        vdu = v_map(du, traj.model)
        grad_v = np.stack([(np.roll(vdu, -1, axis=j) - np.roll(vdu, 1, axis=j)) / (2 * grid.h)
                           for j in range(2)], axis=-1)
        grad_du = np.stack([(np.roll(du, -1, axis=j) - np.roll(du, 1, axis=j)) / (2 * grid.h)
                            for j in range(2)], axis=-1)
        dens = np.sum(grad_v**2, axis=(-3, -2, -1)) + phi_dd0 * np.sum(grad_du**2, axis=(-3, -2, -1))
        lhs = max(lhs, h2 * float(np.sum(dens[mask_r])))

        ut = (traj.snapshots[k] - traj.snapshots[k - 1]) / traj.dt
        grad_u = full_gradient(u, grid)
        dens_rhs = phi(frob(grad_u), traj.model) + np.sum(ut**2, axis=-1)
        rhs_sup = max(rhs_sup, h2 * float(np.sum(dens_rhs[mask_R])))

    rhs = (1.0 + 1.0 / phi_dd0) / (big_r - r) ** 2 * rhs_sup
    observed = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    flag = "kink-data: bounded u_t hypothesis unverified" \
        if traj.meta.get("ic") == "kink" else "ok"
    return BallEstimateReport(lhs=lhs, rhs=rhs, observed_constant=observed,
                              rhs_sup=rhs_sup, hypothesis_flag=flag)


def vmap_consistency_gap(traj: Trajectory, cyl: SubCylinder, k: int = 2) -> float:
    """Bit-equality witness: pipeline differences of the square-root field
    versus manual pointwise differences of the same field values.

    The square-root map is applied snapshot-wise before any differencing, so
    the two routes must agree exactly; returns the max absolute gap.
    """
    f = restrict(traj, cyl, target="vmap")
    from .function_spaces import higher_difference
    pipeline = higher_difference(f, 1, k * f.dt).values
    manual = f.values[k:] - f.values[:-k]
    return float(np.max(np.abs(pipeline - manual)))
