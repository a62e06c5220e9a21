"""Discrete trajectory evolution with mode switching and containment guard."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Optional

import numpy as np

from . import _kernels as _k
from .errors import GuardConflict, InvalidInput, InvalidStart, OutOfDomain
from .flow import Mode
from .geometry import Superquadric, Vec3, as_vec3, gamma
from .modulation import raise_status

# Sentinel mode value for out-of-domain grid points in field sweeps.
FIELD_INVALID = -1

_START_SLACK = 1e-9


@dataclass(frozen=True)
class IntegratorConfig:
    """Euler-loop settings.

    The guard projects each post-step point radially back onto any violated
    surface; the containment theorems are continuous-time statements and the
    guard is what absorbs the explicit-Euler overshoot.  Turn it off only to
    study the raw discrete behaviour.
    """

    dt: float = 1e-3
    max_steps: int = 200_000
    goal_tol: float = 1e-3
    guard: bool = True
    record_stride: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidInput("dt must be positive")
        if self.max_steps < 1:
            raise InvalidInput("max_steps must be >= 1")
        if not (math.isfinite(self.goal_tol) and self.goal_tol > 0.0):
            raise InvalidInput("goal_tol must be positive")
        if self.record_stride < 1:
            raise InvalidInput("record_stride must be >= 1")


class Outcome(Enum):
    REACHED_TARGET = "reached_target"
    MAX_STEPS = "max_steps"
    ERROR = "error"


class TrajectorySample(NamedTuple):
    t: float
    xi: Vec3
    v: Vec3
    mode: Mode
    gamma_o: Optional[float]
    gamma_w: float


@dataclass(frozen=True)
class TrajectoryStats:
    """Extremes and counters over every step taken (not just recorded ones)."""

    min_gamma_o: Optional[float]
    max_gamma_w: float
    steps: int
    mode_transitions: int


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded samples in columnar form plus the run outcome.

    ``gamma_o`` is NaN-filled when the scenario has no obstacle.
    """

    t: np.ndarray
    xi: np.ndarray
    v: np.ndarray
    mode: np.ndarray
    gamma_o: np.ndarray
    gamma_w: np.ndarray
    outcome: Outcome
    error: Optional[str]
    stats: TrajectoryStats
    has_obstacle: bool

    def __len__(self) -> int:
        return len(self.t)

    def samples(self) -> Iterator[TrajectorySample]:
        for i in range(len(self.t)):
            yield TrajectorySample(
                float(self.t[i]),
                self.xi[i],
                self.v[i],
                Mode(int(self.mode[i])),
                float(self.gamma_o[i]) if self.has_obstacle else None,
                float(self.gamma_w[i]),
            )


def step(xi, v, dt: float) -> Vec3:
    """One explicit-Euler update ``xi + v * dt``."""
    return as_vec3(xi) + as_vec3(v) * float(dt)


def containment_guard(ws: Superquadric, ob: Superquadric | None, xi) -> Vec3:
    """Project ``xi`` back into the valid region (gamma_w <= 1, gamma_o >= 1).

    Each violated surface is handled by exact radial rescaling about its
    center; the two projections alternate a bounded number of times when they
    conflict near the intersection line.
    """
    out = as_vec3(xi).copy()
    has_ob = ob is not None
    if has_ob:
        oc, oa, op = ob.center, ob.axes_eff, ob.power
    else:
        oc, oa, op = ws.center, ws.axes_eff, ws.power
    status = _k.guard_project(out, ws.center, ws.axes_eff, ws.power, has_ob, oc, oa, op)
    if status == _k.ERR_GUARD_CONFLICT:
        raise GuardConflict("could not satisfy both containment constraints")
    if status != _k.OK:
        raise_status(status)
    return out


_SIM_ERROR_CODES = {
    _k.ERR_INVALID_INPUT: "invalid_input",
    _k.ERR_ZERO_NORMAL: "zero_normal",
    _k.ERR_PARALLEL_NORMALS: "parallel_normals",
    _k.ERR_SINGULAR_BASIS: "singular_basis",
    _k.ERR_NEAR_INTERSECTION: "near_intersection_singularity",
    _k.ERR_RANK_DEFICIENT: "rank_deficient",
    _k.ERR_OUT_OF_DOMAIN: "out_of_domain",
    _k.ERR_GUARD_CONFLICT: "guard_conflict",
}


def simulate(scenario, start=None, config: IntegratorConfig | None = None) -> Trajectory:
    """Evolve one trajectory of ``scenario`` from ``start``.

    ``start`` defaults to the scenario's first start point and ``config`` to
    the scenario's integrator settings.  The start must lie inside the
    workspace and outside the obstacle.  A guard conflict ends the run with
    ``Outcome.ERROR``; evaluation errors propagate as exceptions.
    """
    if config is None:
        config = scenario.integrator
    start = as_vec3(scenario.starts[0] if start is None else start)

    ws = scenario.workspace
    ob = scenario.obstacle
    baseline = scenario.flow.baseline
    if not baseline and gamma(ws, start) > 1.0 + _START_SLACK:
        raise InvalidStart("start point lies outside the workspace")
    if ob is not None and gamma(ob, start) < 1.0 - _START_SLACK:
        raise InvalidStart("start point lies inside the obstacle")

    has_ob = ob is not None
    if has_ob:
        oc, oa, op = ob.center, ob.axes_eff, ob.power
    else:
        oc, oa, op = ws.center, ws.axes_eff, ws.power

    n_max = config.max_steps // config.record_stride + 2
    rec_t = np.empty(n_max)
    rec_xi = np.empty((n_max, 3))
    rec_v = np.empty((n_max, 3))
    rec_mode = np.empty(n_max, dtype=np.int64)
    rec_go = np.empty(n_max)
    rec_gw = np.empty(n_max)

    status, n_rec, steps, transitions, min_go, max_gw = _k.simulate(
        start,
        ws.center,
        ws.axes_eff,
        ws.power,
        has_ob,
        oc,
        oa,
        op,
        scenario.ds.matrix,
        scenario.ds.target,
        scenario.modulation.lambda_w,
        scenario.modulation.eps_weight,
        scenario.flow.v_th,
        scenario.flow.sign_pref.sign,
        scenario.flow.beta1,
        scenario.flow.beta2,
        baseline,
        config.dt,
        config.max_steps,
        config.goal_tol,
        config.guard,
        config.record_stride,
        rec_t,
        rec_xi,
        rec_v,
        rec_mode,
        rec_go,
        rec_gw,
    )

    if status == _k.SIM_REACHED:
        outcome, error = Outcome.REACHED_TARGET, None
    elif status == _k.SIM_MAX_STEPS:
        outcome, error = Outcome.MAX_STEPS, None
    elif status == _k.ERR_GUARD_CONFLICT:
        outcome, error = Outcome.ERROR, _SIM_ERROR_CODES[status]
    else:
        if status == _k.ERR_OUT_OF_DOMAIN:
            raise OutOfDomain("trajectory left the evaluable domain")
        raise_status(status)

    stats = TrajectoryStats(
        min_gamma_o=float(min_go) if has_ob else None,
        max_gamma_w=float(max_gw),
        steps=steps,
        mode_transitions=transitions,
    )
    return Trajectory(
        t=rec_t[:n_rec].copy(),
        xi=rec_xi[:n_rec].copy(),
        v=rec_v[:n_rec].copy(),
        mode=rec_mode[:n_rec].copy(),
        gamma_o=rec_go[:n_rec].copy() if has_ob else np.full(n_rec, np.nan),
        gamma_w=rec_gw[:n_rec].copy(),
        outcome=outcome,
        error=error,
        stats=stats,
        has_obstacle=has_ob,
    )


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Rectilinear grid: inclusive bounds and point counts per axis."""

    mins: Vec3
    maxs: Vec3
    res: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "mins", as_vec3(self.mins))
        object.__setattr__(self, "maxs", as_vec3(self.maxs))
        res = tuple(int(r) for r in self.res)
        if len(res) != 3 or any(r < 1 for r in res):
            raise InvalidInput("res must be three integers >= 1")
        object.__setattr__(self, "res", res)

    def points(self) -> np.ndarray:
        axes = [
            np.linspace(self.mins[i], self.maxs[i], self.res[i]) for i in range(3)
        ]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)


@dataclass(frozen=True, eq=False)
class FieldSamples:
    """Velocity field sampled on a grid; mode = FIELD_INVALID marks points
    outside the valid domain (their velocity is zero)."""

    xi: np.ndarray
    v: np.ndarray
    mode: np.ndarray


def sweep_field(scenario, grid: GridSpec) -> FieldSamples:
    """Evaluate the modulated field on every in-domain grid point."""
    from .flow import eval_modulated

    pts = grid.points()
    n = len(pts)
    v = np.zeros((n, 3))
    mode = np.full(n, FIELD_INVALID, dtype=np.int64)
    ws, ob = scenario.workspace, scenario.obstacle
    for i in range(n):
        if gamma(ws, pts[i]) > 1.0:
            continue
        if ob is not None and gamma(ob, pts[i]) < 1.0:
            continue
        vel, m = eval_modulated(
            ws, ob, scenario.ds, pts[i], scenario.flow, scenario.modulation
        )
        v[i] = vel
        mode[i] = int(m)
    return FieldSamples(xi=pts, v=v, mode=mode)
