"""GOSPA mapping metric and UE state RMSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import solve_lap
from .errors import LengthMismatch
from .geometry import wrap_angle


@dataclass(frozen=True)
class GospaParams:
    """Cutoff (m), order, and cardinality-penalty split."""

    cutoff: float = 20.0
    order: float = 2.0
    alpha: float = 2.0

    def __post_init__(self):
        if self.cutoff <= 0.0:
            raise ValueError("cutoff must be positive")
        if self.order < 1.0:
            raise ValueError("order must be >= 1")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")


@dataclass(frozen=True)
class GospaResult:
    """Total distance plus its p-th power decomposition (exact for alpha=2)."""

    total: float
    localization: float
    missed_cost: float
    false_cost: float
    n_missed: int
    n_false: int


def gospa(truth, estimates, params: GospaParams = GospaParams()) -> GospaResult:
    """Generalized optimal sub-pattern assignment distance between point sets.

    The optimal pairing is computed by a linear assignment over distances
    truncated at the cutoff; unmatched (or beyond-cutoff) points contribute
    cutoff^p / alpha each to the missed / false terms.
    """
    truth = np.asarray(truth, dtype=float).reshape(-1, 3) if len(truth) else np.zeros((0, 3))
    estimates = (np.asarray(estimates, dtype=float).reshape(-1, 3)
                 if len(estimates) else np.zeros((0, 3)))
    c, p, alpha = params.cutoff, params.order, params.alpha
    miss_unit = c**p / alpha

    n_t, n_e = truth.shape[0], estimates.shape[0]
    if n_t == 0 or n_e == 0:
        missed = miss_unit * n_t
        false = miss_unit * n_e
        return GospaResult((missed + false) ** (1.0 / p), 0.0, missed, false,
                           n_t, n_e)

    dists = np.linalg.norm(truth[:, None, :] - estimates[None, :, :], axis=2)
    cost = np.minimum(dists, c) ** p
    transposed = n_t > n_e
    assignment = solve_lap(cost.T if transposed else cost)

    localization = 0.0
    matched_t = set()
    matched_e = set()
    for row, col in enumerate(assignment.cols):
        ti, ei = (col, row) if transposed else (row, col)
        if dists[ti, ei] < c:
            localization += dists[ti, ei] ** p
            matched_t.add(ti)
            matched_e.add(ei)
    n_missed = n_t - len(matched_t)
    n_false = n_e - len(matched_e)
    missed = miss_unit * n_missed
    false = miss_unit * n_false
    # total: optimal truncated pairing plus the cardinality-difference penalty
    # (exact for any alpha); for alpha = 2 a beyond-cutoff pairing costs the
    # same as one missed plus one false, so the fields sum to total**p
    total_p = assignment.cost + miss_unit * abs(n_t - n_e)
    return GospaResult(total_p ** (1.0 / p), localization, missed, false,
                       n_missed, n_false)


@dataclass(frozen=True)
class StateRmse:
    pos: float  # m
    heading: float  # rad
    bias: float  # m


def rmse(truth_states, est_states) -> StateRmse:
    """Root mean squared UE state error over a paired series.

    Accepts (K, 4) arrays or sequences of UEState; heading errors are wrapped
    to (-pi, pi] before squaring.
    """
    t = _as_state_array(truth_states)
    e = _as_state_array(est_states)
    if t.shape != e.shape:
        raise LengthMismatch(f"series shapes differ: {t.shape} vs {e.shape}")
    if t.shape[0] == 0:
        raise LengthMismatch("empty series")
    pos_sq = (t[:, 0] - e[:, 0]) ** 2 + (t[:, 1] - e[:, 1]) ** 2
    head_sq = wrap_angle(t[:, 2] - e[:, 2]) ** 2
    bias_sq = (t[:, 3] - e[:, 3]) ** 2
    return StateRmse(float(np.sqrt(pos_sq.mean())),
                     float(np.sqrt(head_sq.mean())),
                     float(np.sqrt(bias_sq.mean())))


def _as_state_array(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        return states.reshape(-1, 4)
    rows = []
    for s in states:
        rows.append(s.as_array() if hasattr(s, "as_array") else np.asarray(s, dtype=float))
    return np.asarray(rows, dtype=float).reshape(-1, 4)
