"""Bundled demonstration scenes and small trajectory-analysis helpers.

Two scenes ship with the package:

* an interior obstacle blocking a near-boundary route: obstacle-only
  modulation (the baseline mode) steers around the obstacle but leaves the
  workspace, while the full method stays inside and still reaches the target;
* an obstacle poking through the workspace boundary: trajectories ride the
  intersection line around it, in either direction depending on the sign
  preference, giving two mirror-image circumnavigations.
"""

from __future__ import annotations

import numpy as np

from .flow import FlowParams, LinearAttractor, Mode, ScaledRadial, SignPreference
from .geometry import Superquadric, as_vec3, gamma
from .integrator import (
    IntegratorConfig,
    Outcome,
    Trajectory,
    TrajectoryStats,
)
from .scenario import Scenario


def interior_obstacle_scenario(baseline: bool = False) -> Scenario:
    """Near-boundary chord blocked by an interior spherical obstacle.

    Start and target hug the workspace boundary on opposite sides of an
    obstacle that also sits near the boundary, so the chord between them
    passes the obstacle on its outer side.  With ``baseline=True`` the
    workspace matrices are disabled (obstacle-only modulation, guard off) and
    the detour crosses the boundary (max gamma_w ~ 1.055); the full method
    keeps gamma_w <= 1 and still reaches the target.
    """
    workspace = Superquadric(center=(0.0, 0.0, 0.0), axes=(1.0, 1.0, 1.0), power=1)
    obstacle = Superquadric(center=(0.84, 0.0, 0.0), axes=(0.15, 0.15, 0.15), power=1)
    ds = ScaledRadial(gain=1.0, target=(0.95, -0.3, 0.02))
    return Scenario(
        workspace=workspace,
        obstacle=obstacle,
        ds=ds,
        flow=FlowParams(baseline=baseline),
        integrator=IntegratorConfig(guard=not baseline, max_steps=60_000),
        starts=[np.array([0.95, 0.3, 0.0])],
    )


def crossing_obstacle_scenario(sign_pref: SignPreference) -> Scenario:
    """Obstacle poking through the workspace boundary; the trajectory rides
    the intersection line around it in the direction picked by ``sign_pref``.

    The start sits inside the band next to the intersection circle (azimuth
    75 degrees around the obstacle axis, nudged into the wedge between the
    two surfaces).  The attractor carries a rotation about the y axis, which
    keeps the line transport from stalling on a symmetry plane of the field.
    """
    workspace = Superquadric(center=(0.0, 0.0, 0.0), axes=(1.0, 1.0, 1.0), power=1)
    obstacle = Superquadric(center=(1.0, 0.0, 0.0), axes=(0.5, 0.5, 0.5), power=1)
    ds = LinearAttractor(
        gain_matrix=np.array(
            [[1.0, 0.0, 0.7], [0.0, 1.0, 0.0], [-0.7, 0.0, 1.0]]
        ),
        target=(0.2, -0.6, -0.2),
    )
    return Scenario(
        workspace=workspace,
        obstacle=obstacle,
        ds=ds,
        flow=FlowParams(sign_pref=sign_pref, v_th=0.02),
        integrator=IntegratorConfig(max_steps=60_000),
        starts=[np.array([0.8639773, 0.1265279, 0.4722086])],
    )


def run_unmodulated(scenario: Scenario, start=None) -> Trajectory:
    """Integrate the original field with no modulation at all (comparison
    run; gamma values are still recorded)."""
    config = scenario.integrator
    xi = as_vec3(scenario.starts[0] if start is None else start).copy()
    ds, ws, ob = scenario.ds, scenario.workspace, scenario.obstacle
    t, xs, vs, gos, gws = [], [], [], [], []
    outcome = Outcome.MAX_STEPS
    max_gw, min_go = -np.inf, np.inf
    steps = 0
    for i in range(config.max_steps + 1):
        v = -(ds.matrix @ (xi - ds.target))
        gw = gamma(ws, xi)
        go = gamma(ob, xi) if ob is not None else np.nan
        max_gw = max(max_gw, gw)
        if ob is not None:
            min_go = min(min_go, go)
        reached = float(np.linalg.norm(xi - ds.target)) <= config.goal_tol
        if i % config.record_stride == 0 or reached or i == config.max_steps:
            t.append(i * config.dt)
            xs.append(xi.copy())
            vs.append(v)
            gos.append(go)
            gws.append(gw)
        if reached:
            outcome = Outcome.REACHED_TARGET
            break
        if i == config.max_steps:
            break
        xi += v * config.dt
        steps += 1
    has_ob = ob is not None
    return Trajectory(
        t=np.array(t),
        xi=np.stack(xs),
        v=np.stack(vs),
        mode=np.zeros(len(t), dtype=np.int64),
        gamma_o=np.array(gos),
        gamma_w=np.array(gws),
        outcome=outcome,
        error=None,
        stats=TrajectoryStats(
            min_gamma_o=float(min_go) if has_ob else None,
            max_gamma_w=float(max_gw),
            steps=steps,
            mode_transitions=0,
        ),
        has_obstacle=has_ob,
    )


def signed_winding(points: np.ndarray, axis_point, axis_dir) -> float:
    """Total signed angle (radians) swept by ``points`` around an axis.

    Projects onto the plane orthogonal to ``axis_dir`` through ``axis_point``
    and sums wrapped angle increments; opposite circumnavigations of the same
    obstacle give opposite signs.
    """
    axis_point = as_vec3(axis_point)
    a = as_vec3(axis_dir)
    a = a / np.linalg.norm(a)
    # Any fixed orthonormal pair spanning the projection plane.
    helper = np.array([1.0, 0.0, 0.0])
    if abs(float(helper @ a)) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    b1 = np.cross(a, helper)
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(a, b1)
    rel = points - axis_point
    theta = np.arctan2(rel @ b2, rel @ b1)
    dtheta = np.diff(theta)
    dtheta = (dtheta + np.pi) % (2.0 * np.pi) - np.pi
    return float(dtheta.sum())


def intersection_samples(traj: Trajectory) -> np.ndarray:
    """Positions of the samples evaluated in intersection mode."""
    return traj.xi[traj.mode == int(Mode.INTERSECT)]
