"""Compiled scalar kernels behind the public API.

Everything here works on plain float64 arrays and scalars so that a whole
simulation runs without leaving compiled code.  Failures are reported as
integer status codes; the public wrappers translate them into the exception
types of :mod:`wsavoid.errors`.  All kernels are deterministic (no fastmath),
so identical inputs give bit-identical outputs.
"""

import math

import numpy as np
from numba import njit

OK = 0
ERR_INVALID_INPUT = -1
ERR_ZERO_NORMAL = -2
ERR_PARALLEL_NORMALS = -3
ERR_SINGULAR_BASIS = -4
ERR_NEAR_INTERSECTION = -5
ERR_RANK_DEFICIENT = -6
ERR_OUT_OF_DOMAIN = -7
ERR_GUARD_CONFLICT = -8

MODE_FREE = 0
MODE_COMBINED = 1
MODE_INTERSECT = 2

SIM_REACHED = 0
SIM_MAX_STEPS = 1

# Numerical policy constants.  DOMAIN_SLACK is deliberately loose: it is a
# sanity check on the evaluation preconditions, not the containment bound
# (the guard enforces GUARD_TOL; the theorems are checked at 1e-9).
DOMAIN_SLACK = 0.05
GUARD_TOL = 1e-12
GUARD_MAX_ALTERNATIONS = 8
# The band predicate carries a tolerance at its unit edges so guard-rounded
# states (gamma = 1 +- GUARD_TOL) resolve into the band instead of hitting
# the singular combined-mode weights on the line itself.
BAND_EDGE_TOL = 1e-9
ZERO_NORMAL_TOL = 1e-12
PARALLEL_TOL = 1e-10
PIVOT_TOL = 1e-9
PINV_DET_TOL = 1e-14
ZERO_VELOCITY_TOL = 1e-12


@njit(cache=True)
def gamma(xi, center, axes_eff, power):
    """Superquadric level value; returns -1.0 for non-finite input."""
    s = 0.0
    for i in range(3):
        if not math.isfinite(xi[i]):
            return -1.0
        t = (xi[i] - center[i]) / axes_eff[i]
        s += (t * t) ** power
    return s


@njit(cache=True)
def gamma_gradient(xi, center, axes_eff, power, out):
    for i in range(3):
        if not math.isfinite(xi[i]):
            return ERR_INVALID_INPUT
        t = (xi[i] - center[i]) / axes_eff[i]
        out[i] = 2.0 * power * t ** (2 * power - 1) / axes_eff[i]
    return OK


@njit(cache=True)
def norm3(v):
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


@njit(cache=True)
def cross3(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True)
def tangent_basis(n, e1, e2):
    """Two independent vectors orthogonal to ``n`` spanning its plane.

    Uses the component-shuffle construction e1 = (n1, -n0, 0),
    e2 = (n2, 0, -n0) directly when |n0| carries weight, otherwise pivots by
    cyclically permuting coordinates so the largest component takes the n0
    role (the direct form degenerates as n0 -> 0).
    """
    nn = norm3(n)
    if nn < ZERO_NORMAL_TOL:
        return ERR_ZERO_NORMAL
    if abs(n[0]) >= PIVOT_TOL * nn:
        k = 0
    else:
        k = 1
        if abs(n[2]) > abs(n[1]):
            k = 2
    if k == 0:
        e1[0] = n[1]
        e1[1] = -n[0]
        e1[2] = 0.0
        e2[0] = n[2]
        e2[1] = 0.0
        e2[2] = -n[0]
    else:
        # Permuted view m[j] = n[(j + k) % 3]; results mapped back through
        # e[i] = f[(i - k) % 3].
        m0 = n[k]
        m1 = n[(1 + k) % 3]
        m2 = n[(2 + k) % 3]
        f10 = m1
        f11 = -m0
        f12 = 0.0
        f20 = m2
        f21 = 0.0
        f22 = -m0
        for i in range(3):
            j = (i - k) % 3
            if j == 0:
                e1[i] = f10
                e2[i] = f20
            elif j == 1:
                e1[i] = f11
                e2[i] = f21
            else:
                e1[i] = f12
                e2[i] = f22
    return OK


@njit(cache=True)
def set_identity(out):
    for i in range(3):
        for j in range(3):
            out[i, j] = 1.0 if i == j else 0.0


@njit(cache=True)
def modulation_from_normal(n, lam1, lam23, out):
    """out = lam23 I + (lam1 - lam23) n n^T / (n^T n).

    Algebraically equal to E diag(lam1, lam23, lam23) E^-1 with
    E = [n, e1, e2]: the two tangential eigenvalues coincide and the basis
    spans exactly the orthogonal complement of n, so the eigendecomposition
    collapses to this projector form.  Unlike an explicit inverse of E it
    keeps M E = E D at machine precision even where the component-shuffle
    basis is nearly parallel (|n0| << ||n||).
    """
    nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
    if nn < ZERO_NORMAL_TOL * ZERO_NORMAL_TOL:
        return ERR_ZERO_NORMAL
    c = (lam1 - lam23) / nn
    for i in range(3):
        for j in range(3):
            out[i, j] = c * n[i] * n[j]
        out[i, i] += lam23
    return OK


@njit(cache=True)
def workspace_modulation(xi, wc, wa, wp, lambda_w, omega_w, out):
    """Workspace matrix; ``omega_w = 1`` gives the unweighted form.

    Inside the identity region (gamma <= lambda_w) or for omega_w = 0 the
    eigenvalues are all exactly 1, so the exact identity is returned.
    """
    gw = gamma(xi, wc, wa, wp)
    if gw < 0.0:
        return ERR_INVALID_INPUT
    if gw <= lambda_w or omega_w == 0.0:
        set_identity(out)
        return OK
    grad = np.empty(3)
    status = gamma_gradient(xi, wc, wa, wp, grad)
    if status != OK:
        return status
    n = np.empty(3)
    for i in range(3):
        n[i] = -grad[i]
    return modulation_from_normal(n, 1.0 - omega_w * gw, 1.0 + omega_w * gw, out)


@njit(cache=True)
def obstacle_modulation(xi, oc, oa, op, omega_o, out):
    """Obstacle matrix with eigenvalues 1 -+/+ omega_o / gamma_o."""
    go = gamma(xi, oc, oa, op)
    if go < 0.0:
        return ERR_INVALID_INPUT
    if omega_o == 0.0:
        set_identity(out)
        return OK
    grad = np.empty(3)
    status = gamma_gradient(xi, oc, oa, op, grad)
    if status != OK:
        return status
    return modulation_from_normal(grad, 1.0 - omega_o / go, 1.0 + omega_o / go, out)


@njit(cache=True)
def weights(gw, go, eps_weight):
    """Surface weights from the two gamma values; (status, omega_o, omega_w)."""
    d = (go - 1.0) + (1.0 - gw)
    if d < eps_weight:
        return ERR_NEAR_INTERSECTION, 0.0, 0.0
    return OK, (1.0 - gw) / d, (go - 1.0) / d


@njit(cache=True)
def pinv_3x2(e, out):
    """Left pseudo-inverse (E^T E)^-1 E^T of a 3x2 matrix."""
    g00 = e[0, 0] * e[0, 0] + e[1, 0] * e[1, 0] + e[2, 0] * e[2, 0]
    g11 = e[0, 1] * e[0, 1] + e[1, 1] * e[1, 1] + e[2, 1] * e[2, 1]
    g01 = e[0, 0] * e[0, 1] + e[1, 0] * e[1, 1] + e[2, 0] * e[2, 1]
    det = g00 * g11 - g01 * g01
    scale = g00 * g11
    if scale <= 0.0 or abs(det) < PINV_DET_TOL * scale:
        return ERR_RANK_DEFICIENT
    i00 = g11 / det
    i01 = -g01 / det
    i11 = g00 / det
    for j in range(3):
        out[0, j] = i00 * e[j, 0] + i01 * e[j, 1]
        out[1, j] = i01 * e[j, 0] + i11 * e[j, 1]
    return OK


@njit(cache=True)
def intersection_tangent(xi, wc, wa, wp, oc, oa, op, e_ow):
    """Cross product of the two inward/outward surface normals."""
    grad = np.empty(3)
    status = gamma_gradient(xi, wc, wa, wp, grad)
    if status != OK:
        return status
    n_w = np.empty(3)
    for i in range(3):
        n_w[i] = -grad[i]
    status = gamma_gradient(xi, oc, oa, op, grad)
    if status != OK:
        return status
    nw_norm = norm3(n_w)
    no_norm = norm3(grad)
    if nw_norm < ZERO_NORMAL_TOL or no_norm < ZERO_NORMAL_TOL:
        return ERR_ZERO_NORMAL
    cross3(n_w, grad, e_ow)
    if norm3(e_ow) < PARALLEL_TOL * nw_norm * no_norm:
        return ERR_PARALLEL_NORMALS
    return OK


@njit(cache=True)
def intersection_modulation(xi, wc, wa, wp, oc, oa, op, out, e_ow):
    """Rank-deficient line matrix E diag(1 - 1/g_o, 1 + 1/g_o) pinv(E).

    E has the obstacle normal and the line tangent as columns; the tangent is
    also written to ``e_ow`` for the caller (direction selection, floor).
    """
    status = intersection_tangent(xi, wc, wa, wp, oc, oa, op, e_ow)
    if status != OK:
        return status
    grad = np.empty(3)
    gamma_gradient(xi, oc, oa, op, grad)
    go = gamma(xi, oc, oa, op)
    if go < 0.0:
        return ERR_INVALID_INPUT
    lam1 = 1.0 - 1.0 / go
    lam2 = 1.0 + 1.0 / go
    e = np.empty((3, 2))
    for i in range(3):
        e[i, 0] = grad[i]
        e[i, 1] = e_ow[i]
    p = np.empty((2, 3))
    status = pinv_3x2(e, p)
    if status != OK:
        return status
    for i in range(3):
        a = e[i, 0] * lam1
        b = e[i, 1] * lam2
        for j in range(3):
            out[i, j] = a * p[0, j] + b * p[1, j]
    return OK


@njit(cache=True)
def eval_original(a_mat, target, xi, out):
    """out = -A (xi - target)."""
    d0 = xi[0] - target[0]
    d1 = xi[1] - target[1]
    d2 = xi[2] - target[2]
    for i in range(3):
        out[i] = -(a_mat[i, 0] * d0 + a_mat[i, 1] * d1 + a_mat[i, 2] * d2)


@njit(cache=True)
def matvec3(m, v, out):
    for i in range(3):
        out[i] = m[i, 0] * v[0] + m[i, 1] * v[1] + m[i, 2] * v[2]


@njit(cache=True)
def eval_modulated(
    xi,
    wc,
    wa,
    wp,
    has_ob,
    oc,
    oa,
    op,
    a_mat,
    target,
    lambda_w,
    eps_weight,
    v_th,
    sign_pref,
    beta1,
    beta2,
    baseline,
    out_v,
):
    """Modulated velocity at ``xi``; returns (status, mode, gamma_w, gamma_o).

    Dispatch: no obstacle -> workspace matrix only; inside the beta band ->
    intersection-line matrix followed by direction selection and the velocity
    floor; otherwise the combined (obstacle x weighted-workspace) matrix.
    ``baseline`` switches to the obstacle-only matrix with full weight and
    ignores the workspace entirely (comparison mode).
    """
    for i in range(3):
        if not math.isfinite(xi[i]):
            return ERR_INVALID_INPUT, MODE_FREE, 0.0, 0.0
    gw = gamma(xi, wc, wa, wp)
    go = math.inf
    if has_ob:
        go = gamma(xi, oc, oa, op)
        if go < 1.0 - DOMAIN_SLACK:
            return ERR_OUT_OF_DOMAIN, MODE_FREE, gw, go
    if not baseline and gw > 1.0 + DOMAIN_SLACK:
        return ERR_OUT_OF_DOMAIN, MODE_FREE, gw, go

    f = np.empty(3)
    eval_original(a_mat, target, xi, f)
    m = np.empty((3, 3))

    if baseline:
        if not has_ob:
            for i in range(3):
                out_v[i] = f[i]
            return OK, MODE_FREE, gw, go
        status = obstacle_modulation(xi, oc, oa, op, 1.0, m)
        if status != OK:
            return status, MODE_COMBINED, gw, go
        matvec3(m, f, out_v)
        return OK, MODE_COMBINED, gw, go

    if not has_ob:
        status = workspace_modulation(xi, wc, wa, wp, lambda_w, 1.0, m)
        if status != OK:
            return status, MODE_FREE, gw, go
        matvec3(m, f, out_v)
        return OK, MODE_FREE, gw, go

    in_band = (
        beta1 <= gw <= 1.0 + BAND_EDGE_TOL
        and 1.0 - BAND_EDGE_TOL <= go <= beta2
    )
    if in_band:
        e_ow = np.empty(3)
        status = intersection_modulation(xi, wc, wa, wp, oc, oa, op, m, e_ow)
        if status != OK:
            return status, MODE_INTERSECT, gw, go
        matvec3(m, f, out_v)
        # Direction selection, then the floor (so a sign flip cannot undo it).
        dot = out_v[0] * e_ow[0] + out_v[1] * e_ow[1] + out_v[2] * e_ow[2]
        s = sign_pref if dot >= 0.0 else -sign_pref
        for i in range(3):
            out_v[i] = s * out_v[i]
        nv = norm3(out_v)
        if nv < v_th:
            if nv <= ZERO_VELOCITY_TOL:
                scale = v_th * sign_pref / norm3(e_ow)
                for i in range(3):
                    out_v[i] = scale * e_ow[i]
            else:
                scale = v_th / nv
                for i in range(3):
                    out_v[i] = scale * out_v[i]
        return OK, MODE_INTERSECT, gw, go

    status, omega_o, omega_w = weights(gw, go, eps_weight)
    if status != OK:
        return status, MODE_COMBINED, gw, go
    m_w = np.empty((3, 3))
    status = workspace_modulation(xi, wc, wa, wp, lambda_w, omega_w, m_w)
    if status != OK:
        return status, MODE_COMBINED, gw, go
    status = obstacle_modulation(xi, oc, oa, op, omega_o, m)
    if status != OK:
        return status, MODE_COMBINED, gw, go
    tmp = np.empty(3)
    matvec3(m_w, f, tmp)
    matvec3(m, tmp, out_v)
    return OK, MODE_COMBINED, gw, go


@njit(cache=True)
def guard_project(xi, wc, wa, wp, has_ob, oc, oa, op):
    """Project ``xi`` (in place) back into gamma_w <= 1, gamma_o >= 1.

    Radial rescaling about each body center is exact for superquadrics:
    gamma(c + s*d) = s^(2p) * gamma(c + d).  The two projections may fight
    near the intersection line, hence the bounded alternation.
    """
    for _ in range(GUARD_MAX_ALTERNATIONS):
        gw = gamma(xi, wc, wa, wp)
        if gw < 0.0:
            return ERR_INVALID_INPUT
        if gw > 1.0 + GUARD_TOL:
            s = gw ** (-1.0 / (2.0 * wp))
            for i in range(3):
                xi[i] = wc[i] + s * (xi[i] - wc[i])
        if has_ob:
            go = gamma(xi, oc, oa, op)
            if go < 1.0 - GUARD_TOL:
                if go <= 0.0:
                    return ERR_GUARD_CONFLICT
                s = go ** (-1.0 / (2.0 * op))
                for i in range(3):
                    xi[i] = oc[i] + s * (xi[i] - oc[i])
        gw = gamma(xi, wc, wa, wp)
        ok = gw <= 1.0 + GUARD_TOL
        if has_ob and ok:
            ok = gamma(xi, oc, oa, op) >= 1.0 - GUARD_TOL
        if ok:
            return OK
    return ERR_GUARD_CONFLICT


@njit(cache=True)
def simulate(
    start,
    wc,
    wa,
    wp,
    has_ob,
    oc,
    oa,
    op,
    a_mat,
    target,
    lambda_w,
    eps_weight,
    v_th,
    sign_pref,
    beta1,
    beta2,
    baseline,
    dt,
    max_steps,
    goal_tol,
    guard,
    stride,
    rec_t,
    rec_xi,
    rec_v,
    rec_mode,
    rec_go,
    rec_gw,
):
    """Explicit-Euler evolution with mode dispatch, guard and recording.

    Returns (status, n_recorded, steps, mode_transitions, min_go, max_gw)
    where status is SIM_REACHED, SIM_MAX_STEPS or a negative error code.
    """
    xi = start.copy()
    v = np.empty(3)
    n_rec = 0
    steps = 0
    transitions = 0
    prev_mode = -1
    min_go = math.inf
    max_gw = -math.inf
    last_rec_step = -1
    status_out = SIM_MAX_STEPS

    for step_i in range(max_steps + 1):
        status, mode, gw, go = eval_modulated(
            xi, wc, wa, wp, has_ob, oc, oa, op, a_mat, target,
            lambda_w, eps_weight, v_th, sign_pref, beta1, beta2, baseline, v,
        )
        if status != OK:
            status_out = status
            break
        if gw > max_gw:
            max_gw = gw
        if has_ob and go < min_go:
            min_go = go
        if prev_mode >= 0 and mode != prev_mode:
            transitions += 1
        prev_mode = mode

        d0 = xi[0] - target[0]
        d1 = xi[1] - target[1]
        d2 = xi[2] - target[2]
        reached = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2) <= goal_tol
        last = reached or step_i == max_steps
        if (step_i % stride == 0 or last) and step_i != last_rec_step:
            rec_t[n_rec] = step_i * dt
            for i in range(3):
                rec_xi[n_rec, i] = xi[i]
                rec_v[n_rec, i] = v[i]
            rec_mode[n_rec] = mode
            rec_go[n_rec] = go
            rec_gw[n_rec] = gw
            last_rec_step = step_i
            n_rec += 1
        if reached:
            status_out = SIM_REACHED
            break
        if step_i == max_steps:
            status_out = SIM_MAX_STEPS
            break

        for i in range(3):
            xi[i] = xi[i] + v[i] * dt
        if guard:
            gstatus = guard_project(xi, wc, wa, wp, has_ob, oc, oa, op)
            if gstatus != OK:
                status_out = gstatus
                break
        steps += 1

    return status_out, n_rec, steps, transitions, min_go, max_gw
