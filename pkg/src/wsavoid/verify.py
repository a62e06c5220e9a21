"""Seed-deterministic invariant suite.

Each check regenerates its own random geometry from the seed, runs a
numerical assertion derived from the containment/annihilation theory, and
reports the worst residual against its bound.  The suite backs the ``verify``
command and is reused by the test suite; the random generators here are also
used to build Monte-Carlo containment scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import FlowParams, LinearAttractor, ScaledRadial
from .geometry import (
    Superquadric,
    gamma,
    gamma_gradient,
    intersection_tangent,
    obstacle_normal,
    surface_point,
    tangent_basis,
    workspace_normal,
)
from .integrator import IntegratorConfig, Outcome, simulate
from .modulation import (
    ModulationParams,
    intersection_modulation,
    modified_workspace_modulation,
    obstacle_modulation,
    weights,
    workspace_modulation,
)
from .scenario import Scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return f"{self.name}: {status} worst={self.worst:.3e} bound={self.bound:.1e}{extra}"


# ---------------------------------------------------------------------------
# Random geometry / scenarios
# ---------------------------------------------------------------------------

def random_workspace(rng: np.random.Generator) -> Superquadric:
    return Superquadric(
        center=rng.uniform(-0.2, 0.2, 3),
        axes=rng.uniform(0.6, 1.6, 3),
        power=int(rng.integers(1, 4)),
    )


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _obstacle_boundary_cloud(ob: Superquadric, n: int, rng) -> np.ndarray:
    return np.stack([surface_point(ob, random_unit(rng)) for _ in range(n)])


def random_obstacle_inside(rng: np.random.Generator, ws: Superquadric) -> Superquadric:
    """Obstacle strictly interior to the workspace (no boundary contact)."""
    while True:
        direction = random_unit(rng)
        center = ws.center + rng.uniform(0.0, 0.55) * (
            surface_point(ws, direction) - ws.center
        )
        ob = Superquadric(
            center=center,
            axes=rng.uniform(0.08, 0.22, 3),
            power=int(rng.choice([1, 2, 4])),
            margin=float(rng.uniform(0.0, 0.03)),
        )
        cloud = _obstacle_boundary_cloud(ob, 128, rng)
        if max(gamma(ws, p) for p in cloud) < 0.95:
            return ob


def random_obstacle_crossing(rng: np.random.Generator, ws: Superquadric) -> Superquadric:
    """Obstacle whose surface crosses the workspace boundary.

    Centering the obstacle on a workspace boundary point guarantees that its
    surface has points on both sides of the boundary.
    """
    while True:
        center = surface_point(ws, random_unit(rng))
        ob = Superquadric(
            center=center,
            axes=rng.uniform(0.15, 0.4, 3),
            power=int(rng.choice([1, 2, 4])),
        )
        cloud = _obstacle_boundary_cloud(ob, 128, rng)
        gammas = np.array([gamma(ws, p) for p in cloud])
        if gammas.min() < 0.98 and gammas.max() > 1.02:
            return ob


def random_point_valid(
    rng: np.random.Generator,
    ws: Superquadric,
    ob: Superquadric | None = None,
    gw_max: float = 0.85,
    go_min: float = 1.15,
) -> np.ndarray:
    """Rejection-sample a point inside the workspace and outside the obstacle."""
    while True:
        direction = random_unit(rng)
        tau = rng.uniform(0.05, 1.0) ** (1.0 / (2.0 * ws.power))
        point = ws.center + tau * gw_max ** (1.0 / (2.0 * ws.power)) * (
            surface_point(ws, direction) - ws.center
        )
        if gamma(ws, point) > gw_max:
            continue
        if ob is not None and gamma(ob, point) < go_min:
            continue
        return point


def random_ds(rng: np.random.Generator, target: np.ndarray):
    if rng.random() < 0.5:
        return ScaledRadial(gain=float(rng.uniform(0.5, 1.5)), target=target)
    c = rng.uniform(0.5, 1.5)
    w = rng.uniform(-1.0, 1.0, 3)
    skew = np.array(
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    )
    return LinearAttractor(gain_matrix=c * np.eye(3) + skew, target=target)


def random_scenario(rng: np.random.Generator, intersecting: bool) -> Scenario:
    """A containment-suite scenario: random bodies, valid start and target."""
    ws = random_workspace(rng)
    ob = (
        random_obstacle_crossing(rng, ws)
        if intersecting
        else random_obstacle_inside(rng, ws)
    )
    target = random_point_valid(rng, ws, ob)
    start = random_point_valid(rng, ws, ob)
    return Scenario(
        workspace=ws,
        obstacle=ob,
        ds=random_ds(rng, target),
        starts=[start],
    )


def sample_line_points(
    ws: Superquadric, ob: Superquadric, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Points with gamma_w = gamma_o = 1 to ~1e-12, by bisection along the
    workspace boundary between a direction inside and one outside the
    obstacle (boundary projection is exact, so gamma_w stays pinned at 1)."""

    def obstacle_gap(direction):
        return gamma(ob, surface_point(ws, direction)) - 1.0

    d_in = ob.center - ws.center
    d_in = d_in / np.linalg.norm(d_in)
    if obstacle_gap(d_in) >= 0.0:
        raise ValueError("obstacle does not cross the workspace boundary")

    points = []
    while len(points) < n:
        d_out = random_unit(rng)
        if obstacle_gap(d_out) <= 0.0 or float(d_out @ d_in) < -0.9:
            continue
        lo, hi = 0.0, 1.0  # parameter along the direction blend, lo inside
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            d_mid = (1.0 - mid) * d_in + mid * d_out
            d_mid /= np.linalg.norm(d_mid)
            if obstacle_gap(d_mid) < 0.0:
                lo = mid
            else:
                hi = mid
        d_final = (1.0 - hi) * d_in + hi * d_out
        point = surface_point(ws, d_final / np.linalg.norm(d_final))
        if abs(gamma(ob, point) - 1.0) <= 1e-10:
            points.append(point)
    return np.stack(points)


def crossing_pair(rng: np.random.Generator):
    ws = random_workspace(rng)
    return ws, random_obstacle_crossing(rng, ws)


# ---------------------------------------------------------------------------
# Reference constructions (independent of the compiled kernels)
# ---------------------------------------------------------------------------

def reference_workspace_matrix(
    ws: Superquadric,
    xi,
    params: ModulationParams,
    omega_w: float = 1.0,
    lambda_sign: float = 1.0,
) -> np.ndarray:
    """Textbook assembly E diag(...) E^-1 using numpy's solver.

    ``lambda_sign`` flips the gamma term of the first eigenvalue; -1 is the
    deliberate corruption used to prove the boundary check can fail.
    """
    g = gamma(ws, xi)
    if g <= params.lambda_w or omega_w == 0.0:
        return np.eye(3)
    n = workspace_normal(ws, xi)
    e1, e2 = tangent_basis(n)
    e_mat = np.column_stack([n, e1, e2])
    d_mat = np.diag(
        [1.0 - lambda_sign * omega_w * g, 1.0 + omega_w * g, 1.0 + omega_w * g]
    )
    return e_mat @ d_mat @ np.linalg.inv(e_mat)


def reference_obstacle_matrix(ob: Superquadric, xi, omega_o: float) -> np.ndarray:
    g = gamma(ob, xi)
    n = obstacle_normal(ob, xi)
    e1, e2 = tangent_basis(n)
    e_mat = np.column_stack([n, e1, e2])
    d_mat = np.diag([1.0 - omega_o / g, 1.0 + omega_o / g, 1.0 + omega_o / g])
    return e_mat @ d_mat @ np.linalg.inv(e_mat)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_gradient_fd(seed: int, n_points: int = 1000) -> CheckResult:
    """Analytic gamma gradient vs central differences (h = 1e-5)."""
    rng = np.random.default_rng(seed)
    h = 1e-5
    worst = 0.0
    for _ in range(n_points):
        body = random_workspace(rng)
        xi = body.center + rng.uniform(0.1, 3.0) * random_unit(rng)
        grad = gamma_gradient(body, xi)
        fd = np.empty(3)
        for i in range(3):
            dp = xi.copy()
            dm = xi.copy()
            dp[i] += h
            dm[i] -= h
            fd[i] = (gamma(body, dp) - gamma(body, dm)) / (2.0 * h)
        scale = max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, float(np.linalg.norm(grad - fd) / scale))
    return CheckResult("gradient_fd", worst <= 1e-6, worst, 1e-6)


def check_boundary_annihilation(
    seed: int, n_bodies: int = 50, points_per_body: int = 20, lambda_sign: float = 1.0
) -> CheckResult:
    """Normal velocity vanishes on the workspace boundary: |n . M f| ~ 0."""
    rng = np.random.default_rng(seed)
    params = ModulationParams()
    worst = 0.0
    for _ in range(n_bodies):
        ws = random_workspace(rng)
        for _ in range(points_per_body):
            point = surface_point(ws, random_unit(rng))
            f = rng.normal(size=3)
            if lambda_sign == 1.0:
                m = workspace_modulation(ws, point, params)
            else:
                m = reference_workspace_matrix(
                    ws, point, params, lambda_sign=lambda_sign
                )
            n = workspace_normal(ws, point)
            residual = abs(float(n @ (m @ f))) / (
                np.linalg.norm(n) * np.linalg.norm(f)
            )
            worst = max(worst, residual)
    return CheckResult("boundary_annihilation", worst <= 1e-9, worst, 1e-9)


def check_line_annihilation(
    seed: int, n_pairs: int = 20, points_per_pair: int = 50
) -> CheckResult:
    """On the intersection line both normal velocities vanish and the output
    is parallel to the line tangent."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        ws, ob = crossing_pair(rng)
        for point in sample_line_points(ws, ob, points_per_pair, rng):
            f = rng.normal(size=3)
            m = intersection_modulation(ws, ob, point)
            v = m @ f
            n_w = workspace_normal(ws, point)
            n_o = obstacle_normal(ob, point)
            e_ow = intersection_tangent(ws, ob, point)
            scale = np.linalg.norm(f)
            worst = max(worst, abs(float(n_o @ v)) / (np.linalg.norm(n_o) * scale))
            worst = max(worst, abs(float(n_w @ v)) / (np.linalg.norm(n_w) * scale))
            nv = np.linalg.norm(v)
            if nv > 1e-12:
                sine = np.linalg.norm(np.cross(v, e_ow)) / (
                    nv * np.linalg.norm(e_ow)
                )
                worst = max(worst, float(sine))
    return CheckResult("line_annihilation", worst <= 1e-9, worst, 1e-9)


def check_weight_partition(
    seed: int, n_pairs: int = 100, points_per_pair: int = 1000
) -> CheckResult:
    """omega_o + omega_w = 1 with both weights in [0, 1] over valid points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        ws = random_workspace(rng)
        ob = random_obstacle_inside(rng, ws)
        for _ in range(points_per_pair):
            point = random_point_valid(rng, ws, ob, gw_max=0.999, go_min=1.0001)
            omega_o, omega_w = weights(ws, ob, point)
            worst = max(worst, abs(omega_o + omega_w - 1.0))
            worst = max(worst, -min(omega_o, omega_w, 0.0))
            worst = max(worst, max(omega_o - 1.0, omega_w - 1.0, 0.0))
    return CheckResult("weight_partition", worst <= 1e-12, worst, 1e-12)


def check_identity_branch(seed: int, n_points: int = 2000) -> CheckResult:
    """gamma_w <= lambda_w returns the identity matrix bit-exactly."""
    rng = np.random.default_rng(seed)
    params = ModulationParams()
    eye = np.eye(3)
    failures = 0
    for _ in range(n_points):
        ws = random_workspace(rng)
        tau = rng.uniform(0.0, params.lambda_w) ** (1.0 / (2.0 * ws.power))
        point = ws.center + tau * (surface_point(ws, random_unit(rng)) - ws.center)
        if gamma(ws, point) > params.lambda_w:
            continue
        if not np.array_equal(workspace_modulation(ws, point, params), eye):
            failures += 1
    return CheckResult("identity_branch", failures == 0, float(failures), 0.0)


def check_rank_one(seed: int, n_pairs: int = 10, points_per_pair: int = 20) -> CheckResult:
    """On the line the intersection matrix has numerical rank 1
    (sigma_2 <= 1e-9 sigma_1 and sigma_3 <= 1e-12)."""
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    worst_s3 = 0.0
    for _ in range(n_pairs):
        ws, ob = crossing_pair(rng)
        for point in sample_line_points(ws, ob, points_per_pair, rng):
            s = np.linalg.svd(intersection_modulation(ws, ob, point), compute_uv=False)
            worst_ratio = max(worst_ratio, float(s[1] / s[0]))
            worst_s3 = max(worst_s3, float(s[2]))
    passed = worst_ratio <= 1e-9 and worst_s3 <= 1e-12
    return CheckResult(
        "rank_one", passed, worst_ratio, 1e-9, detail=f"sigma3={worst_s3:.3e}"
    )


def check_reconstruction(seed: int, n_cases: int = 300) -> CheckResult:
    """M E = E D for every constructed square modulation (and the compiled
    matrices agree with the numpy reference assembly)."""
    rng = np.random.default_rng(seed)
    params = ModulationParams()
    worst = 0.0
    for _ in range(n_cases):
        ws = random_workspace(rng)
        ob = random_obstacle_inside(rng, ws)
        point = random_point_valid(rng, ws, ob, gw_max=0.999, go_min=1.0001)
        gw = gamma(ws, point)
        omega_o, omega_w = weights(ws, ob, point)

        cases = []
        if gw > params.lambda_w:
            n = workspace_normal(ws, point)
            e1, e2 = tangent_basis(n)
            e_mat = np.column_stack([n, e1, e2])
            cases.append(
                (
                    workspace_modulation(ws, point, params),
                    e_mat,
                    np.diag([1.0 - gw, 1.0 + gw, 1.0 + gw]),
                )
            )
            cases.append(
                (
                    modified_workspace_modulation(ws, point, omega_w, params),
                    e_mat,
                    np.diag(
                        [1.0 - omega_w * gw, 1.0 + omega_w * gw, 1.0 + omega_w * gw]
                    ),
                )
            )
        go = gamma(ob, point)
        n_o = obstacle_normal(ob, point)
        o1, o2 = tangent_basis(n_o)
        cases.append(
            (
                obstacle_modulation(ob, point, omega_o),
                np.column_stack([n_o, o1, o2]),
                np.diag(
                    [1.0 - omega_o / go, 1.0 + omega_o / go, 1.0 + omega_o / go]
                ),
            )
        )
        for m, e_mat, d_mat in cases:
            scale = np.linalg.norm(e_mat) * max(np.linalg.norm(d_mat), 1.0)
            residual = np.abs(m @ e_mat - e_mat @ d_mat).max() / scale
            worst = max(worst, float(residual))
    return CheckResult("reconstruction", worst <= 1e-10, worst, 1e-10)


def check_containment(
    seed: int,
    n_scenarios: int = 200,
    max_steps: int = 20_000,
    dt: float = 1e-3,
    guard: bool = True,
) -> CheckResult:
    """Monte-Carlo containment: gamma_w <= 1 and gamma_o >= 1 on every step
    of randomized scenarios, half interior-obstacle, half crossing."""
    rng = np.random.default_rng(seed)
    config = IntegratorConfig(
        dt=dt, max_steps=max_steps, goal_tol=1e-3, guard=guard, record_stride=100
    )
    worst = 0.0
    reached = 0
    for i in range(n_scenarios):
        scenario = random_scenario(rng, intersecting=i % 2 == 1)
        traj = simulate(scenario, config=config)
        if traj.outcome is Outcome.REACHED_TARGET:
            reached += 1
        worst = max(worst, traj.stats.max_gamma_w - 1.0)
        worst = max(worst, 1.0 - traj.stats.min_gamma_o)
    return CheckResult(
        "containment",
        worst <= 1e-9,
        worst,
        1e-9,
        detail=f"reached {reached}/{n_scenarios}",
    )


def run_all(
    seed: int = 0,
    lambda_sign: float = 1.0,
    containment_scenarios: int = 200,
) -> list[CheckResult]:
    """Run the whole suite; same seed, same residuals, every time."""
    return [
        check_gradient_fd(seed),
        check_boundary_annihilation(seed + 1, lambda_sign=lambda_sign),
        check_line_annihilation(seed + 2),
        check_weight_partition(seed + 3),
        check_identity_branch(seed + 4),
        check_rank_one(seed + 5),
        check_reconstruction(seed + 6),
        check_containment(seed + 7, n_scenarios=containment_scenarios),
    ]
