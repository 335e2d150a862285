"""Constant turn-rate UE motion model and ground-truth trajectory synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import UEState, wrap_angle

_OMEGA_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class MotionConfig:
    """Known control inputs and process noise of the UE motion."""

    speed: float  # m/s
    turn_rate: float  # rad/s
    period: float  # s
    process_noise: np.ndarray = field(
        default_factory=lambda: np.zeros((4, 4)))  # (m^2, m^2, rad^2, m^2)

    def __post_init__(self):
        if not self.period > 0.0:
            raise ValueError("sampling period must be positive")
        q = np.asarray(self.process_noise, dtype=float).reshape(4, 4)
        if not np.allclose(q, q.T):
            raise ValueError("process noise covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(q)) < -1e-12:
            raise ValueError("process noise covariance must be PSD")
        q.flags.writeable = False
        object.__setattr__(self, "process_noise", q)

    def chord(self) -> float:
        """Displacement magnitude over one period; vT in the zero-turn limit."""
        if abs(self.turn_rate) < _OMEGA_EPS:
            return self.speed * self.period
        return (2.0 * self.speed / self.turn_rate
                * math.sin(self.turn_rate * self.period / 2.0))


def propagate(ue: UEState, cfg: MotionConfig) -> UEState:
    """Noiseless one-step transition; bias is a random walk (mean unchanged)."""
    half_turn = cfg.turn_rate * cfg.period / 2.0
    g = cfg.chord()
    return UEState(
        ue.x + g * math.cos(ue.heading + half_turn),
        ue.y + g * math.sin(ue.heading + half_turn),
        wrap_angle(ue.heading + cfg.turn_rate * cfg.period),
        ue.clock_bias,
    )


def transition_jacobian(ue: UEState, cfg: MotionConfig) -> np.ndarray:
    """d propagate / d state at `ue`; rows and columns (x, y, heading, bias)."""
    half_turn = cfg.turn_rate * cfg.period / 2.0
    g = cfg.chord()
    F = np.eye(4)
    F[0, 2] = -g * math.sin(ue.heading + half_turn)
    F[1, 2] = g * math.cos(ue.heading + half_turn)
    return F


def simulate_trajectory(init: UEState, cfg: MotionConfig, steps: int,
                        noise: bool = False,
                        rng: np.random.Generator | int | None = None) -> list[UEState]:
    """States at k = 1..steps obtained by iterating the transition from `init`.

    With `noise` enabled each step adds a zero-mean Gaussian with the
    configured process covariance; the result is deterministic given the seed.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    chol = None
    if noise:
        q = cfg.process_noise
        # PSD square root; tolerates semidefinite covariances
        w, v = np.linalg.eigh(q)
        chol = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    out = []
    state = init
    for _ in range(steps):
        state = propagate(state, cfg)
        if noise:
            eta = chol @ gen.standard_normal(4)
            state = UEState(state.x + eta[0], state.y + eta[1],
                            state.heading + eta[2], state.clock_bias + eta[3])
        out.append(state)
    return out
