"""Recursive posterior information matrix over the joint UE + map state.

State ordering: UE dims 0..3 (x, y, heading, bias), then 3 dims per unknown
landmark in scenario order. The known BS contributes measurement rows to the
UE block but is not part of the estimated state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .dynamics import MotionConfig, simulate_trajectory, transition_jacobian
from .errors import NumericalFailure, SingularPrior
from .geometry import LandmarkKind, Scenario, UEState
from .jacobians import meas_jacobian_lm, meas_jacobian_ue
from .sensing import SensorConfig

_COND_LIMIT = 1e12


def _spd_inverse(mat: np.ndarray, what: str) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix with a condition guard."""
    sym = 0.5 * (mat + mat.T)
    eigs = np.linalg.eigvalsh(sym)
    if eigs[0] <= 0.0 or eigs[-1] / eigs[0] > _COND_LIMIT:
        raise NumericalFailure(
            f"{what} is singular or ill-conditioned (eigs {eigs[0]:.3e}..{eigs[-1]:.3e})")
    factor = cho_factor(sym)
    inv = cho_solve(factor, np.eye(sym.shape[0]))
    return 0.5 * (inv + inv.T)


def pim_init(ue_prior_cov, lm_prior_cov, n_landmarks: int) -> np.ndarray:
    """Initial information matrix: block-diagonal inverse of the priors."""
    ue_prior_cov = np.asarray(ue_prior_cov, dtype=float).reshape(4, 4)
    lm_prior_cov = np.asarray(lm_prior_cov, dtype=float).reshape(3, 3)
    try:
        ue_info = _spd_inverse(ue_prior_cov, "UE prior covariance")
        lm_info = _spd_inverse(lm_prior_cov, "landmark prior covariance")
    except NumericalFailure as exc:
        raise SingularPrior(str(exc)) from exc
    n = 4 + 3 * n_landmarks
    J = np.zeros((n, n))
    J[:4, :4] = ue_info
    for i in range(n_landmarks):
        sl = slice(4 + 3 * i, 7 + 3 * i)
        J[sl, sl] = lm_info
    return J


def data_information(true_ue: UEState, scenario: Scenario, sensor: SensorConfig,
                     speed: float, detected=None) -> np.ndarray:
    """Measurement information H^T R^-1 H for one scan with known association.

    `detected` flags the BS first, then the unknown landmarks in scenario
    order; undetected paths contribute nothing.
    """
    lms = scenario.all_landmarks()
    if detected is None:
        detected = np.ones(len(lms), dtype=bool)
    detected = np.asarray(detected, dtype=bool)
    if detected.shape[0] != len(lms):
        raise ValueError("one detection flag per landmark (BS first) required")
    n_lm = len(scenario.landmarks)
    n = 4 + 3 * n_lm
    with_doppler = sensor.with_doppler
    r_inv = np.diag(1.0 / np.diag(sensor.noise_cov(with_doppler)))
    bs_pos = scenario.bs.position
    J = np.zeros((n, n))
    for idx, lm in enumerate(lms):
        if not detected[idx]:
            continue
        A = meas_jacobian_ue(lm, true_ue, speed, bs_pos, with_doppler)
        if lm.kind is LandmarkKind.BS:
            J[:4, :4] += A.T @ r_inv @ A
            continue
        B = meas_jacobian_lm(lm, true_ue, speed, bs_pos, with_doppler)
        sl = slice(4 + 3 * (idx - 1), 7 + 3 * (idx - 1))
        J[:4, :4] += A.T @ r_inv @ A
        J[sl, sl] += B.T @ r_inv @ B
        cross = A.T @ r_inv @ B
        J[:4, sl] += cross
        J[sl, :4] += cross.T
    return J


def pim_step(J_prev: np.ndarray, true_ue: UEState, scenario: Scenario,
             motion: MotionConfig, sensor: SensorConfig,
             detected=None) -> np.ndarray:
    """One recursion of the posterior information matrix.

    J = H^T R^-1 H + (Q_full + F_full J_prev^-1 F_full^T)^-1 with the map
    static (identity transition, zero process noise on landmark blocks).
    `true_ue` is the true UE state AFTER the transition, where the
    measurement Jacobians are evaluated.
    """
    J_prev = np.asarray(J_prev, dtype=float)
    n = J_prev.shape[0]
    n_lm = (n - 4) // 3
    if n != 4 + 3 * n_lm or n_lm != len(scenario.landmarks):
        raise ValueError("information matrix size does not match the scenario")

    # previous true state: the recursion linearizes the transition at the
    # pre-step state, so reconstruct it by inverting the (noiseless) motion
    F = np.eye(n)
    F[:4, :4] = transition_jacobian(_previous_state(true_ue, motion), motion)
    Q = np.zeros((n, n))
    Q[:4, :4] = motion.process_noise

    J_inv = _spd_inverse(J_prev, "previous information matrix")
    prior = _spd_inverse(Q + F @ J_inv @ F.T, "propagated prior covariance")
    J = data_information(true_ue, scenario, sensor, motion.speed, detected) + prior
    return 0.5 * (J + J.T)


def _previous_state(ue: UEState, motion: MotionConfig) -> UEState:
    """Invert the noiseless constant turn-rate step."""
    half = motion.turn_rate * motion.period / 2.0
    g = motion.chord()
    prev_heading = ue.heading - motion.turn_rate * motion.period
    return UEState(ue.x - g * np.cos(prev_heading + half),
                   ue.y - g * np.sin(prev_heading + half),
                   prev_heading, ue.clock_bias)


@dataclass(frozen=True)
class BoundsReport:
    """Square-root CRB style bounds extracted from the inverse PIM diagonal."""

    peb: float  # m
    heb_rad: float
    heb_deg: float
    ceb: float  # m
    leb: np.ndarray  # m, per landmark
    leb_avg: float  # m


def extract_bounds(J: np.ndarray) -> BoundsReport:
    """Position / heading / clock-bias / landmark error bounds from J."""
    J = np.asarray(J, dtype=float)
    cov = _spd_inverse(J, "information matrix")
    d = np.diag(cov)
    n_lm = (J.shape[0] - 4) // 3
    leb = np.array([
        np.sqrt(d[4 + 3 * i: 7 + 3 * i].sum()) for i in range(n_lm)
    ])
    heb = float(np.sqrt(d[2]))
    return BoundsReport(
        peb=float(np.sqrt(d[0] + d[1])),
        heb_rad=heb,
        heb_deg=float(np.degrees(heb)),
        ceb=float(np.sqrt(d[3])),
        leb=leb,
        leb_avg=float(leb.mean()) if n_lm else 0.0,
    )


@dataclass(frozen=True)
class DopplerSplit:
    """Additive decomposition of the per-scan measurement information."""

    ue_non_doppler: np.ndarray  # 4x4, summed over paths
    ue_doppler: np.ndarray  # 4x4, summed over paths
    ue_doppler_per_path: list  # 4x4 outer-product term per path (BS first)
    lm_non_doppler: list  # 3x3 per unknown landmark
    lm_doppler: list  # 3x3 per unknown landmark


def doppler_decomposition(true_ue: UEState, scenario: Scenario,
                          sensor: SensorConfig, speed: float) -> DopplerSplit:
    """Split each path's information into angle/delay and Doppler parts.

    The Doppler terms are rank <= 1 outer products scaled by 1/sigma_d^2 and
    always have a zero bias row and column.
    """
    bs_pos = scenario.bs.position
    r_nd_inv = np.diag(1.0 / np.diag(sensor.noise_cov(with_doppler=False)))
    inv_var_d = 1.0 / sensor.sigma_d**2
    ue_nd = np.zeros((4, 4))
    ue_d = np.zeros((4, 4))
    per_path = []
    lm_nd = []
    lm_d = []
    for lm in scenario.all_landmarks():
        A = meas_jacobian_ue(lm, true_ue, speed, bs_pos, with_doppler=True)
        a_tilde = A[5]
        term = np.outer(a_tilde, a_tilde) * inv_var_d
        ue_nd += A[:5].T @ r_nd_inv @ A[:5]
        ue_d += term
        per_path.append(term)
        if lm.kind is LandmarkKind.BS:
            continue
        B = meas_jacobian_lm(lm, true_ue, speed, bs_pos, with_doppler=True)
        lm_nd.append(B[:5].T @ r_nd_inv @ B[:5])
        lm_d.append(np.outer(B[5], B[5]) * inv_var_d)
    return DopplerSplit(ue_nd, ue_d, per_path, lm_nd, lm_d)


def run_recursion(scenario: Scenario, motion: MotionConfig, sensor: SensorConfig,
                  ue_init: UEState, ue_prior_cov, lm_prior_var: float,
                  steps: int, detected=None) -> list[BoundsReport]:
    """Bounds after each step along the nominal (noiseless) trajectory."""
    J = pim_init(ue_prior_cov, lm_prior_var * np.eye(3), len(scenario.landmarks))
    truth = simulate_trajectory(ue_init, motion, steps, noise=False)
    out = []
    for ue in truth:
        J = pim_step(J, ue, scenario, motion, sensor, detected)
        out.append(extract_bounds(J))
    return out


def sweep_sigma_d(scenario: Scenario, motion: MotionConfig,
                  sensor: SensorConfig, grid, ue_init: UEState, ue_prior_cov,
                  lm_prior_var: float, steps: int) -> list[dict]:
    """Per-step bound rows for each Doppler noise level plus the baseline.

    Returns one dict per (sigma_d, step) with the no-Doppler reference rows
    carrying an empty sigma_d. Aggregations (final step or time mean) are left
    to the caller; both are recoverable from the per-step rows.
    """
    grid = [float(g) for g in grid]
    if not grid or min(grid) <= 0.0:
        raise ValueError("sigma_d grid must be non-empty and positive")
    rows = []

    def emit(tag_sigma, doppler_enabled, reports):
        for k, rep in enumerate(reports, start=1):
            row = {
                "sigma_d": tag_sigma,
                "doppler_enabled": doppler_enabled,
                "k": k,
                "PEB_m": rep.peb,
                "HEB_rad": rep.heb_rad,
                "HEB_deg": rep.heb_deg,
                "CEB_m": rep.ceb,
                "LEB_avg_m": rep.leb_avg,
            }
            for i, v in enumerate(rep.leb, start=1):
                row[f"LEB_{i}_m"] = float(v)
            rows.append(row)

    for sd in grid:
        cfg = SensorConfig(range_var=sensor.range_var, angle_var=sensor.angle_var,
                           sigma_d=sd, detection_prob=sensor.detection_prob,
                           clutter_rate=sensor.clutter_rate,
                           clutter_region=sensor.clutter_region,
                           with_doppler=True)
        emit(sd, True, run_recursion(scenario, motion, cfg, ue_init,
                                     ue_prior_cov, lm_prior_var, steps))
    base = SensorConfig(range_var=sensor.range_var, angle_var=sensor.angle_var,
                        sigma_d=sensor.sigma_d, detection_prob=sensor.detection_prob,
                        clutter_rate=sensor.clutter_rate,
                        clutter_region=sensor.clutter_region, with_doppler=False)
    emit(None, False, run_recursion(scenario, motion, base, ue_init,
                                    ue_prior_cov, lm_prior_var, steps))
    return rows


def aggregate_bounds(rows: list[dict], aggregation: str) -> list[dict]:
    """Collapse per-step sweep rows to one row per (sigma_d, doppler case)."""
    if aggregation not in ("final", "mean"):
        raise ValueError("aggregation must be 'final' or 'mean'")
    keys = sorted({(r["sigma_d"], r["doppler_enabled"]) for r in rows},
                  key=lambda t: (not t[1], t[0] if t[0] is not None else -1.0))
    fields = [f for f in rows[0] if f not in ("sigma_d", "doppler_enabled", "k")]
    out = []
    for sd, dop in keys:
        group = [r for r in rows if r["sigma_d"] == sd and r["doppler_enabled"] == dop]
        group.sort(key=lambda r: r["k"])
        agg = {"sigma_d": sd, "doppler_enabled": dop, "aggregation": aggregation}
        for f in fields:
            vals = [g[f] for g in group]
            agg[f] = vals[-1] if aggregation == "final" else float(np.mean(vals))
        out.append(agg)
    return out
