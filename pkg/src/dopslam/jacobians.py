"""Analytic first derivatives of the measurement function.

Rows follow the measurement ordering (range, aoa_az, aoa_el, aod_az, aod_el,
doppler); the UE Jacobian columns are (x, y, heading, bias), the landmark
Jacobian columns the 3D landmark position. Every formula is certified against
central finite differences (see `fd_check`).
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidKind
from .geometry import (
    Landmark,
    LandmarkKind,
    UEState,
    aoa_direction,
    measure_array,
    wrap_angle,
)

# embeds (x, y) displacements into 3D (UE stays on the x-y plane)
_S23 = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


def _dq_dw(w: np.ndarray):
    """Jacobian of w/||w|| with respect to w, and the norm."""
    n = float(np.linalg.norm(w))
    q = w / n
    return (np.eye(3) - np.outer(q, q)) / n, q, n


def _dangles_dq(q: np.ndarray) -> np.ndarray:
    """Rows: azimuth and elevation derivatives w.r.t. the unit vector."""
    c2 = q[0] ** 2 + q[1] ** 2
    out = np.zeros((2, 3))
    out[0, 0] = -q[1] / c2
    out[0, 1] = q[0] / c2
    out[1, 2] = 1.0 / np.sqrt(max(1.0 - q[2] ** 2, 1e-300))
    return out


def _incidence_point_jacobians(va: np.ndarray, bs: np.ndarray, u: np.ndarray):
    """d x_inc / d u3 and d x_inc / d x_VA for the plane-line intersection.

    The bisector normal is kept unnormalized (it cancels in the intersection
    ratio), which makes the x_VA dependence a plain rational function.
    """
    n = va - bs
    mid = 0.5 * (bs + va)
    line = va - u
    num = float(np.dot(mid - u, n))
    den = float(np.dot(line, n))
    t = num / den
    dt_du = n * (num - den) / den**2
    de_du = (1.0 - t) * np.eye(3) + np.outer(line, dt_du)
    dnum_dva = 0.5 * n + (mid - u)
    dden_dva = n + line
    dt_dva = (dnum_dva * den - num * dden_dva) / den**2
    de_dva = t * np.eye(3) + np.outer(line, dt_dva)
    return de_du, de_dva, t


def meas_jacobian_ue(landmark: Landmark, ue: UEState, speed: float,
                     bs_pos, with_doppler: bool = True) -> np.ndarray:
    """Measurement Jacobian w.r.t. the UE state (6x4, or 5x4 without Doppler)."""
    bs_pos = np.asarray(bs_pos, dtype=float)
    u = ue.position3()
    v = ue.velocity3(speed)
    v_perp = np.array([-v[1], v[0], 0.0])
    A = np.zeros((6, 4))

    q_aoa, rho, x_inc = aoa_direction(landmark, u, bs_pos)
    d = float(np.dot(v, q_aoa))

    # range and AOA behave as a single leg towards the BS / mirror point / SP
    if landmark.kind is LandmarkKind.BS:
        w_a = landmark.position - u
    elif landmark.kind is LandmarkKind.VA:
        w_a = landmark.position - u
    else:
        w_a = x_inc - u
    dq_dw_a, _, _ = _dq_dw(w_a)
    dq_dxy = dq_dw_a @ (-_S23)

    A[0, 0:2] = -q_aoa[0:2]
    A[0, 3] = 1.0
    A[1:3, 0:2] = _dangles_dq(q_aoa) @ dq_dxy
    A[1, 2] = -1.0  # AOA azimuth carries the frame rotation into the UE frame

    if landmark.kind is LandmarkKind.BS:
        w_d = u - bs_pos
        dq_dw_d, q_aod, _ = _dq_dw(w_d)
        A[3:5, 0:2] = _dangles_dq(q_aod) @ (dq_dw_d @ _S23)
    elif landmark.kind is LandmarkKind.VA:
        de_du, _, _ = _incidence_point_jacobians(landmark.position, bs_pos, u)
        dq_dw_d, q_aod, _ = _dq_dw(x_inc - bs_pos)
        A[3:5, 0:2] = _dangles_dq(q_aod) @ (dq_dw_d @ de_du @ _S23)
    # SP: the departure direction does not depend on the UE

    A[5, 0:2] = -(v - d * q_aoa)[0:2] / rho
    A[5, 2] = float(np.dot(v_perp, q_aoa))
    # A[5, 3] stays exactly 0: Doppler carries no bias information
    return A if with_doppler else A[:5]


def meas_jacobian_lm(landmark: Landmark, ue: UEState, speed: float,
                     bs_pos, with_doppler: bool = True) -> np.ndarray:
    """Measurement Jacobian w.r.t. the landmark position (6x3 or 5x3)."""
    if landmark.kind is LandmarkKind.BS:
        raise InvalidKind("the BS is known and not part of the estimated map")
    bs_pos = np.asarray(bs_pos, dtype=float)
    u = ue.position3()
    v = ue.velocity3(speed)
    B = np.zeros((6, 3))

    q_aoa, rho, x_inc = aoa_direction(landmark, u, bs_pos)
    d = float(np.dot(v, q_aoa))

    if landmark.kind is LandmarkKind.SP:
        dq_dw_a, _, _ = _dq_dw(x_inc - u)
        dq_dw_d, q_aod, _ = _dq_dw(x_inc - bs_pos)
        B[0] = q_aoa + q_aod  # both legs stretch with the scatterer
        B[1:3] = _dangles_dq(q_aoa) @ dq_dw_a
        B[3:5] = _dangles_dq(q_aod) @ dq_dw_d
        B[5] = (v - d * q_aoa) / rho
    else:
        _, de_dva, _ = _incidence_point_jacobians(landmark.position, bs_pos, u)
        dq_dw_a, _, _ = _dq_dw(landmark.position - u)
        dq_dw_d, q_aod, _ = _dq_dw(x_inc - bs_pos)
        B[0] = q_aoa  # mirror identity: path length equals the UE->VA distance
        B[1:3] = _dangles_dq(q_aoa) @ dq_dw_a
        B[3:5] = _dangles_dq(q_aod) @ (dq_dw_d @ de_dva)
        B[5] = (v - d * q_aoa) / rho
    return B if with_doppler else B[:5]


def _wrapped_diff(z_plus: np.ndarray, z_minus: np.ndarray) -> np.ndarray:
    diff = z_plus - z_minus
    diff[1:5] = wrap_angle(diff[1:5])
    return diff


def fd_check(landmark: Landmark, ue: UEState, speed: float, bs_pos,
             step: float = 1e-6) -> float:
    """Max relative error of the analytic Jacobians vs central differences."""
    if not 1e-8 <= step <= 1e-3:
        raise ValueError(f"step {step} outside [1e-8, 1e-3]")
    bs_pos = np.asarray(bs_pos, dtype=float)

    def h_of_state(s):
        return measure_array(landmark, UEState.from_array(s), speed, bs_pos)

    s0 = ue.as_array()
    fd_a = np.zeros((6, 4))
    for j in range(4):
        delta = np.zeros(4)
        delta[j] = step
        fd_a[:, j] = _wrapped_diff(h_of_state(s0 + delta),
                                   h_of_state(s0 - delta)) / (2 * step)
    A = meas_jacobian_ue(landmark, ue, speed, bs_pos)
    err = np.abs(A - fd_a) / np.maximum(1.0, np.abs(A))
    worst = float(err.max())

    if landmark.kind is not LandmarkKind.BS:
        p0 = landmark.position
        fd_b = np.zeros((6, 3))
        for j in range(3):
            delta = np.zeros(3)
            delta[j] = step
            zp = measure_array(Landmark(p0 + delta, landmark.kind), ue, speed, bs_pos)
            zm = measure_array(Landmark(p0 - delta, landmark.kind), ue, speed, bs_pos)
            fd_b[:, j] = _wrapped_diff(zp, zm) / (2 * step)
        B = meas_jacobian_lm(landmark, ue, speed, bs_pos)
        err_b = np.abs(B - fd_b) / np.maximum(1.0, np.abs(B))
        worst = max(worst, float(err_b.max()))
    return worst
