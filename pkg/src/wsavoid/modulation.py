"""Modulation matrices that reshape a velocity field near surfaces.

Each square matrix has the form E D E^-1 where E stacks a surface normal with
a tangent basis and D holds eigenvalues that cancel the normal velocity
component on the surface (first eigenvalue -> 0) while amplifying the
tangential ones.  On the workspace/obstacle intersection line the basis is a
3x2 matrix closed with a pseudo-inverse, which deliberately drops one rank so
motion is confined to the line direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from . import _kernels as _k
from .errors import (
    InvalidInput,
    NearIntersectionSingularity,
    ParallelNormals,
    RankDeficient,
    SingularBasis,
    ZeroNormal,
)
from .geometry import Superquadric

Mat3 = npt.NDArray[np.float64]

_STATUS_ERRORS = {
    _k.ERR_INVALID_INPUT: (InvalidInput, "non-finite query point"),
    _k.ERR_ZERO_NORMAL: (ZeroNormal, "surface gradient vanishes at the query point"),
    _k.ERR_PARALLEL_NORMALS: (ParallelNormals, "surface normals are parallel"),
    _k.ERR_SINGULAR_BASIS: (SingularBasis, "basis matrix is numerically singular"),
    _k.ERR_NEAR_INTERSECTION: (
        NearIntersectionSingularity,
        "gamma_o and gamma_w are both ~1; weights undefined",
    ),
    _k.ERR_RANK_DEFICIENT: (RankDeficient, "pseudo-inverse of a rank-deficient matrix"),
}


def raise_status(status: int) -> None:
    exc, msg = _STATUS_ERRORS[status]
    raise exc(msg)


@dataclass(frozen=True)
class ModulationParams:
    """Shaping parameters for the workspace matrices.

    ``lambda_w`` is the identity-region threshold: below this gamma value the
    workspace matrix is the exact identity, so the original field is untouched
    in the central part of the workspace.  ``eps_weight`` guards the weight
    denominator; falling below it raises instead of clamping because the
    intersection band owns that region.
    """

    lambda_w: float = 0.7
    eps_weight: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.lambda_w < 1.0):
            raise InvalidInput("lambda_w must be in (0, 1)")
        if not (math.isfinite(self.eps_weight) and self.eps_weight > 0.0):
            raise InvalidInput("eps_weight must be positive")


def workspace_modulation(ws: Superquadric, xi, params: ModulationParams) -> Mat3:
    """Workspace boundary matrix: identity for gamma <= lambda_w, otherwise
    eigenvalues (1 - gamma, 1 + gamma, 1 + gamma) on the inward normal basis."""
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty((3, 3))
    status = _k.workspace_modulation(
        xi, ws.center, ws.axes_eff, ws.power, params.lambda_w, 1.0, out
    )
    if status != _k.OK:
        raise_status(status)
    return out


def modified_workspace_modulation(
    ws: Superquadric, xi, omega_w: float, params: ModulationParams
) -> Mat3:
    """Workspace matrix with its gamma term scaled by the weight ``omega_w``."""
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty((3, 3))
    status = _k.workspace_modulation(
        xi, ws.center, ws.axes_eff, ws.power, params.lambda_w, float(omega_w), out
    )
    if status != _k.OK:
        raise_status(status)
    return out


def obstacle_modulation(ob: Superquadric, xi, omega_o: float) -> Mat3:
    """Obstacle matrix: eigenvalues (1 - w/g, 1 + w/g, 1 + w/g) on the outward
    normal basis, where g is the obstacle gamma at ``xi``."""
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty((3, 3))
    status = _k.obstacle_modulation(
        xi, ob.center, ob.axes_eff, ob.power, float(omega_o), out
    )
    if status != _k.OK:
        raise_status(status)
    return out


def weights(
    ws: Superquadric, ob: Superquadric, xi, eps_weight: float = 1e-9
) -> tuple[float, float]:
    """Partition-of-unity weights (omega_o, omega_w) from the two gammas.

    omega_o = (1 - gamma_w) / d and omega_w = (gamma_o - 1) / d with
    d = (gamma_o - 1) + (1 - gamma_w); they sum to 1 and each lies in [0, 1]
    whenever the point is inside the workspace and outside the obstacle.
    """
    from .geometry import gamma

    gw = gamma(ws, xi)
    go = gamma(ob, xi)
    status, omega_o, omega_w = _k.weights(gw, go, eps_weight)
    if status != _k.OK:
        raise_status(status)
    return omega_o, omega_w


def combined_modulation(
    ws: Superquadric, ob: Superquadric, xi, params: ModulationParams
) -> Mat3:
    """Net matrix M_o(omega_o) @ M_w(omega_w); the obstacle factor is applied
    after (left of) the weighted workspace factor."""
    omega_o, omega_w = weights(ws, ob, xi, params.eps_weight)
    m_o = obstacle_modulation(ob, xi, omega_o)
    m_w = modified_workspace_modulation(ws, xi, omega_w, params)
    return m_o @ m_w


def pinv_3x2(e) -> npt.NDArray[np.float64]:
    """Left pseudo-inverse (E^T E)^-1 E^T of a 3x2 matrix."""
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (3, 2):
        raise InvalidInput(f"expected a 3x2 matrix, got shape {e.shape}")
    if not np.all(np.isfinite(e)):
        raise InvalidInput("non-finite matrix entry")
    out = np.empty((2, 3))
    status = _k.pinv_3x2(e, out)
    if status != _k.OK:
        raise_status(status)
    return out


def intersection_modulation(ws: Superquadric, ob: Superquadric, xi) -> Mat3:
    """Intersection-line matrix E diag(1 - 1/g_o, 1 + 1/g_o) pinv(E) with
    E = [obstacle normal, line tangent].

    Exactly on the line (g_o = 1) the first eigenvalue vanishes and every
    output velocity is parallel to the line tangent.
    """
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty((3, 3))
    e_ow = np.empty(3)
    status = _k.intersection_modulation(
        xi, ws.center, ws.axes_eff, ws.power, ob.center, ob.axes_eff, ob.power, out, e_ow
    )
    if status != _k.OK:
        raise_status(status)
    return out
