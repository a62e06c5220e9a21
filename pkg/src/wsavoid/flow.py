"""Original velocity fields and the mode-dispatched modulated evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Union

import numpy as np

from . import _kernels as _k
from .errors import InvalidInput, OutOfDomain
from .geometry import Superquadric, Vec3, as_vec3
from .modulation import ModulationParams, raise_status


class Mode(IntEnum):
    """Which modulation regime governs a point."""

    FREE = _k.MODE_FREE
    COMBINED = _k.MODE_COMBINED
    INTERSECT = _k.MODE_INTERSECT


class SignPreference(Enum):
    """Travel direction along the intersection-line tangent."""

    ALONG = "along"
    OPPOSITE = "opposite"

    @property
    def sign(self) -> float:
        return 1.0 if self is SignPreference.ALONG else -1.0


def _stable_gain_matrix(a: np.ndarray) -> np.ndarray:
    """Validate that -A is Hurwitz via the cubic Routh-Hurwitz conditions.

    det(sI + A) = s^3 + c2 s^2 + c1 s + c0 with c2 = tr A, c1 = sum of the
    principal 2x2 minors, c0 = det A; stability needs c2 > 0, c0 > 0 and
    c2 c1 > c0.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3) or not np.all(np.isfinite(a)):
        raise InvalidInput("gain matrix must be a finite 3x3 matrix")
    c2 = a[0, 0] + a[1, 1] + a[2, 2]
    c1 = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    c0 = float(np.linalg.det(a))
    if not (c2 > 0.0 and c0 > 0.0 and c2 * c1 > c0):
        raise InvalidInput(
            "gain matrix eigenvalues must all have positive real part"
        )
    return a


@dataclass(frozen=True, eq=False)
class LinearAttractor:
    """Field f(x) = -A (x - target) with -A Hurwitz (checked at construction)."""

    gain_matrix: np.ndarray
    target: Vec3

    def __post_init__(self):
        object.__setattr__(self, "gain_matrix", _stable_gain_matrix(self.gain_matrix))
        object.__setattr__(self, "target", as_vec3(self.target))

    @property
    def matrix(self) -> np.ndarray:
        return self.gain_matrix


@dataclass(frozen=True, eq=False)
class ScaledRadial:
    """Field f(x) = -k (x - target), the straight-line contraction."""

    gain: float = 1.0
    target: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.gain) and self.gain > 0.0):
            raise InvalidInput("gain must be positive")
        object.__setattr__(self, "gain", float(self.gain))
        object.__setattr__(self, "target", as_vec3(self.target))
        object.__setattr__(self, "_matrix", self.gain * np.eye(3))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix


OriginalDs = Union[LinearAttractor, ScaledRadial]


@dataclass(frozen=True)
class FlowParams:
    """Evaluator tuning.

    ``v_th`` is the minimum speed kept in intersection mode so the field
    cannot stall at local minima or saddles of the rank-deficient matrix.
    ``beta1``/``beta2`` relax the exact on-the-line condition to the band
    beta1 <= gamma_w <= 1, 1 <= gamma_o <= beta2.  ``baseline`` switches to
    the obstacle-only matrix with full weight and ignores the workspace
    entirely; it exists to reproduce the workspace-violating behaviour that
    motivates the workspace matrices.
    """

    v_th: float = 0.01
    sign_pref: SignPreference = SignPreference.ALONG
    beta1: float = 0.95
    beta2: float = 1.05
    baseline: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.v_th) and self.v_th > 0.0):
            raise InvalidInput("v_th must be positive")
        if not (0.0 < self.beta1 <= 1.0 <= self.beta2):
            raise InvalidInput("need 0 < beta1 <= 1 <= beta2")
        if not isinstance(self.sign_pref, SignPreference):
            raise InvalidInput("sign_pref must be a SignPreference")


def eval_original(ds: OriginalDs, xi) -> Vec3:
    """Velocity of the unmodulated field at ``xi``."""
    xi = as_vec3(xi)
    out = np.empty(3)
    _k.eval_original(ds.matrix, ds.target, xi, out)
    return out


def detect_mode(
    ws: Superquadric, ob: Superquadric | None, xi, params: FlowParams
) -> Mode:
    """Deterministic regime choice from the two gamma values only.

    The band edges at gamma = 1 carry a 1e-9 tolerance so that states the
    containment guard has rounded onto a surface still count as in-band.
    """
    from .geometry import gamma

    if ob is None:
        return Mode.FREE
    gw = gamma(ws, xi)
    go = gamma(ob, xi)
    if (
        params.beta1 <= gw <= 1.0 + _k.BAND_EDGE_TOL
        and 1.0 - _k.BAND_EDGE_TOL <= go <= params.beta2
    ):
        return Mode.INTERSECT
    return Mode.COMBINED


def apply_direction(v, e_ow, sign_pref: SignPreference) -> Vec3:
    """Align ``v`` with (ALONG) or against (OPPOSITE) the line tangent.

    Multiplies by the sign of v . e_ow (ties at 0 count as +), so the result
    for ALONG always has a non-negative component along ``e_ow``; a zero
    velocity passes through unchanged for the floor to handle.
    """
    v = as_vec3(v)
    e_ow = as_vec3(e_ow)
    s = 1.0 if float(v @ e_ow) >= 0.0 else -1.0
    return sign_pref.sign * s * v


def apply_velocity_floor(v, e_ow, params: FlowParams) -> Vec3:
    """Keep intersection-mode speed at or above ``v_th``.

    Slow velocities are rescaled to ``v_th``; an exactly-zero velocity (a
    saddle of the rank-deficient matrix) is replaced by ``v_th`` along the
    signed line tangent, which is what lets trajectories escape such points.
    """
    v = as_vec3(v)
    nv = float(np.linalg.norm(v))
    if nv >= params.v_th:
        return v
    if nv <= _k.ZERO_VELOCITY_TOL:
        e_ow = as_vec3(e_ow)
        return (params.v_th * params.sign_pref.sign / np.linalg.norm(e_ow)) * e_ow
    return (params.v_th / nv) * v


def eval_modulated(
    ws: Superquadric,
    ob: Superquadric | None,
    ds: OriginalDs,
    xi,
    params: FlowParams,
    modulation: ModulationParams | None = None,
) -> tuple[Vec3, Mode]:
    """Modulated velocity and the regime that produced it.

    FREE applies the workspace matrix alone; COMBINED the obstacle-times-
    weighted-workspace product; INTERSECT the line matrix followed by
    direction selection and the velocity floor.
    """
    if modulation is None:
        modulation = ModulationParams()
    xi = np.asarray(xi, dtype=np.float64)
    out = np.empty(3)
    has_ob = ob is not None
    if has_ob:
        oc, oa, op = ob.center, ob.axes_eff, ob.power
    else:
        oc, oa, op = ws.center, ws.axes_eff, ws.power  # unused placeholders
    status, mode, gw, go = _k.eval_modulated(
        xi,
        ws.center,
        ws.axes_eff,
        ws.power,
        has_ob,
        oc,
        oa,
        op,
        ds.matrix,
        ds.target,
        modulation.lambda_w,
        modulation.eps_weight,
        params.v_th,
        params.sign_pref.sign,
        params.beta1,
        params.beta2,
        params.baseline,
        out,
    )
    if status == _k.ERR_OUT_OF_DOMAIN:
        raise OutOfDomain(
            f"point outside the evaluable domain (gamma_w={gw:.6g}, gamma_o={go:.6g})"
        )
    if status != _k.OK:
        raise_status(status)
    return out, Mode(mode)
