"""Superquadric implicit surfaces and their differential geometry.

A body is the level set ``sum_i ((x_i - c_i) / a_i)^(2p) = 1``: an ellipsoid
for ``p = 1``, increasingly box-like as ``p`` grows.  ``gamma`` is an
algebraic inside/outside measure, not a metric distance: it is < 1 inside,
1 on the surface, > 1 outside, and increases monotonically along rays from
the center.  Obstacles carry a safety margin that inflates every axis before
evaluation; workspaces are used with margin 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from . import _kernels as _k
from .errors import InvalidInput, ParallelNormals, ZeroNormal

Vec3 = npt.NDArray[np.float64]


def as_vec3(x) -> Vec3:
    """Coerce to a finite float64 vector of shape (3,)."""
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (3,):
        raise InvalidInput(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("non-finite component in 3-vector")
    return v


@dataclass(frozen=True, eq=False)
class Superquadric:
    """Axis-aligned superquadric body.

    Args:
        center: body center, meters.
        axes: three positive semi-axis lengths, meters.
        power: even-power exponent p >= 1 (the surface uses exponent 2p).
        margin: non-negative length added to every axis before evaluation
            (safety inflation for obstacles; leave 0 for workspaces).
    """

    center: Vec3
    axes: Vec3
    power: int = 1
    margin: float = 0.0

    def __post_init__(self):
        center = as_vec3(self.center)
        axes = as_vec3(self.axes)
        if not np.all(axes > 0.0):
            raise InvalidInput("axes must be positive")
        if int(self.power) != self.power or self.power < 1:
            raise InvalidInput("power must be an integer >= 1")
        margin = float(self.margin)
        if not math.isfinite(margin) or margin < 0.0:
            raise InvalidInput("margin must be finite and >= 0")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "power", int(self.power))
        object.__setattr__(self, "margin", margin)
        object.__setattr__(self, "_axes_eff", axes + margin)

    @property
    def axes_eff(self) -> Vec3:
        """Margin-inflated axes actually used in evaluation."""
        return self._axes_eff


class Region(Enum):
    EXTERIOR = "exterior"
    BOUNDARY = "boundary"
    INTERIOR = "interior"


def gamma(body: Superquadric, xi) -> float:
    """Level value of ``body`` at ``xi`` (margin-inflated axes)."""
    xi = np.asarray(xi, dtype=np.float64)
    g = _k.gamma(xi, body.center, body.axes_eff, body.power)
    if g < 0.0:
        raise InvalidInput("non-finite query point")
    return g


def gamma_gradient(body: Superquadric, xi) -> Vec3:
    """Gradient of :func:`gamma` with respect to the query point."""
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty(3)
    if _k.gamma_gradient(xi, body.center, body.axes_eff, body.power, out) != _k.OK:
        raise InvalidInput("non-finite query point")
    return out


def workspace_normal(body: Superquadric, xi) -> Vec3:
    """Inward-pointing (negated-gradient) normal of a workspace boundary."""
    n = -gamma_gradient(body, xi)
    if _k.norm3(n) < _k.ZERO_NORMAL_TOL:
        raise ZeroNormal("gradient vanishes at the body center")
    return n


def obstacle_normal(body: Superquadric, xi) -> Vec3:
    """Outward-pointing (gradient) normal of an obstacle surface."""
    n = gamma_gradient(body, xi)
    if _k.norm3(n) < _k.ZERO_NORMAL_TOL:
        raise ZeroNormal("gradient vanishes at the body center")
    return n


def tangent_basis(n) -> tuple[Vec3, Vec3]:
    """Two independent vectors spanning the plane orthogonal to ``n``.

    Uses the component-shuffle form e1 = (n1, -n0, 0), e2 = (n2, 0, -n0)
    while the first component carries weight; otherwise the coordinates are
    cyclically permuted so the largest component takes that role, which keeps
    the construction valid for every nonzero normal.
    """
    n = as_vec3(n)
    e1 = np.empty(3)
    e2 = np.empty(3)
    if _k.tangent_basis(n, e1, e2) != _k.OK:
        raise ZeroNormal("cannot build a tangent basis for a zero normal")
    return e1, e2


def classify_region(body: Superquadric, xi, tol: float = 1e-9) -> Region:
    """Exterior / boundary / interior classification of ``xi``."""
    g = gamma(body, xi)
    if abs(g - 1.0) <= tol:
        return Region.BOUNDARY
    return Region.EXTERIOR if g > 1.0 else Region.INTERIOR


def intersection_tangent(ws: Superquadric, ob: Superquadric, xi) -> Vec3:
    """Direction of the workspace/obstacle intersection line at ``xi``.

    Cross product of the workspace inward normal with the obstacle outward
    normal; orthogonal to both.  Swapping the two bodies flips the sign.
    """
    xi = np.asarray(xi, dtype=np.float64)
    e_ow = np.empty(3)
    status = _k.intersection_tangent(
        xi, ws.center, ws.axes_eff, ws.power, ob.center, ob.axes_eff, ob.power, e_ow
    )
    if status == _k.ERR_PARALLEL_NORMALS:
        raise ParallelNormals("surface normals are parallel (tangential contact)")
    if status == _k.ERR_ZERO_NORMAL:
        raise ZeroNormal("query at a body center")
    if status != _k.OK:
        raise InvalidInput("non-finite query point")
    return e_ow


def surface_point(body: Superquadric, direction) -> Vec3:
    """Exact point where the ray ``center + s * direction`` meets the surface.

    Uses the radial scaling law gamma(c + s*d) = s^(2p) * gamma(c + d).
    """
    d = as_vec3(direction)
    g = _k.gamma(body.center + d, body.center, body.axes_eff, body.power)
    if g <= 0.0:
        raise InvalidInput("direction must be a nonzero finite vector")
    s = g ** (-1.0 / (2.0 * body.power))
    return body.center + s * d
