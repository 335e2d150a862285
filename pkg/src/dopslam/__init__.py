"""Bistatic mmWave radio-SLAM laboratory.

Doppler-aware posterior Cramer-Rao bound sweeps and an extended-Kalman
Poisson multi-Bernoulli SLAM filter over synthesized measurement scans.
"""

__version__ = "0.1.0"

from .geometry import (
    Landmark,
    LandmarkKind,
    Measurement,
    Scenario,
    UEState,
    birth_position,
    incidence_point,
    measure,
)

__all__ = [
    "Landmark",
    "LandmarkKind",
    "Measurement",
    "Scenario",
    "UEState",
    "birth_position",
    "incidence_point",
    "measure",
    "__version__",
]
