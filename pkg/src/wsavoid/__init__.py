"""Workspace-constrained dynamical-system obstacle avoidance.

A velocity field with a stable attractor is reshaped by position-dependent
modulation matrices so that integrated trajectories stay inside a convex
superquadric workspace and outside a convex superquadric obstacle, including
the case where the obstacle pokes through the workspace boundary (where
motion is confined to the intersection line of the two surfaces).
"""

from .errors import (
    AvoidanceError,
    GuardConflict,
    InvalidInput,
    InvalidStart,
    NearIntersectionSingularity,
    OutOfDomain,
    ParallelNormals,
    ParseError,
    RankDeficient,
    ScenarioWarning,
    SingularBasis,
    ValidationError,
    ZeroNormal,
)
from .geometry import (
    Region,
    Superquadric,
    Vec3,
    as_vec3,
    classify_region,
    gamma,
    gamma_gradient,
    intersection_tangent,
    obstacle_normal,
    surface_point,
    tangent_basis,
    workspace_normal,
)
from .modulation import (
    Mat3,
    ModulationParams,
    combined_modulation,
    intersection_modulation,
    modified_workspace_modulation,
    obstacle_modulation,
    pinv_3x2,
    weights,
    workspace_modulation,
)
from .flow import (
    FlowParams,
    LinearAttractor,
    Mode,
    OriginalDs,
    ScaledRadial,
    SignPreference,
    apply_direction,
    apply_velocity_floor,
    detect_mode,
    eval_modulated,
    eval_original,
)
from .integrator import (
    FIELD_INVALID,
    FieldSamples,
    GridSpec,
    IntegratorConfig,
    Outcome,
    Trajectory,
    TrajectorySample,
    TrajectoryStats,
    containment_guard,
    simulate,
    step,
    sweep_field,
)
from .scenario import (
    Scenario,
    format_scenario,
    load_scenario,
    parse_scenario,
    read_field,
    read_trajectory,
    write_field,
    write_scenario,
    write_trajectory,
)

__version__ = "0.1.0"
