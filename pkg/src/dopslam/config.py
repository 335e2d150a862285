"""Default scenario constants, run configuration, and JSON round-tripping.

The JSON schema keys carry units (``speed_mps``, ``sigma_d_mps``) so config
files are self-describing; every emitted report echoes the full configuration
so a run can be reproduced exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import MotionConfig
from .errors import ConfigError
from .geometry import Landmark, LandmarkKind, Scenario, UEState
from .sensing import SensorConfig

DEFAULT_BS = [0.0, 0.0, 40.0]
DEFAULT_VAS = [[200.0, 0.0, 40.0], [-200.0, 0.0, 40.0],
               [0.0, 200.0, 40.0], [0.0, -200.0, 40.0]]
DEFAULT_SPS = [[99.0, 0.0, 10.0], [-99.0, 0.0, 10.0],
               [0.0, 99.0, 10.0], [0.0, -99.0, 10.0]]
DEFAULT_SPEED = 22.22  # m/s
DEFAULT_TURN_RATE = math.pi / 10.0  # rad/s, counterclockwise
DEFAULT_PERIOD = 0.5  # s
DEFAULT_PROCESS_DIAG = [0.2**2, 0.2**2, 0.001**2, 0.2**2]
DEFAULT_STEPS = 40  # one full circle
DEFAULT_UE_INIT = [70.7285, 0.0, math.pi / 2.0, 300.0]
DEFAULT_UE_COV_DIAG = [0.3, 0.3, 0.0052, 0.3]
DEFAULT_RANGE_VAR = 1e-2  # m^2
DEFAULT_ANGLE_VAR = 2.5e-3  # rad^2
DEFAULT_SIGMA_D = 0.1  # m/s
DEFAULT_DETECTION_PROB = 0.9
DEFAULT_CLUTTER_RATE = 1.0
DEFAULT_LM_PRIOR_VAR = 100.0  # m^2, diagonal landmark prior for the bound


def default_scenario() -> Scenario:
    lms = [Landmark(p, LandmarkKind.VA) for p in DEFAULT_VAS]
    lms += [Landmark(p, LandmarkKind.SP) for p in DEFAULT_SPS]
    return Scenario(bs=Landmark(DEFAULT_BS, LandmarkKind.BS), landmarks=lms)


def default_motion() -> MotionConfig:
    return MotionConfig(speed=DEFAULT_SPEED, turn_rate=DEFAULT_TURN_RATE,
                        period=DEFAULT_PERIOD,
                        process_noise=np.diag(DEFAULT_PROCESS_DIAG))


def default_sensor(sigma_d: float = DEFAULT_SIGMA_D,
                   with_doppler: bool = True) -> SensorConfig:
    return SensorConfig(range_var=DEFAULT_RANGE_VAR, angle_var=DEFAULT_ANGLE_VAR,
                        sigma_d=sigma_d, detection_prob=DEFAULT_DETECTION_PROB,
                        clutter_rate=DEFAULT_CLUTTER_RATE,
                        clutter_region=default_clutter_region(),
                        with_doppler=with_doppler)


def default_clutter_region(speed: float = DEFAULT_SPEED) -> np.ndarray:
    """Per-dimension clutter bounds: range, four angles, Doppler."""
    return np.array([
        [0.0, 600.0],
        [-math.pi, math.pi],
        [-math.pi / 2.0, math.pi / 2.0],
        [-math.pi, math.pi],
        [-math.pi / 2.0, math.pi / 2.0],
        [-speed, speed],
    ])


def default_ue_init() -> UEState:
    return UEState.from_array(DEFAULT_UE_INIT)


def default_ue_cov() -> np.ndarray:
    return np.diag(DEFAULT_UE_COV_DIAG)


@dataclass
class FilterParams:
    """Housekeeping knobs of the PMB filter."""

    gamma: int = 10
    prune_r: float = 1e-4
    gate_radius: float = 5.0
    max_components: int = 50
    report_r: float = 0.5
    kind_prune: float = 1e-4
    ppp_birth_count_va: float = 4.0
    ppp_birth_count_sp: float = 4.0
    birth_region_volume: float = 500.0 * 500.0 * 50.0  # m^3 deployment box

    def __post_init__(self):
        if self.gamma < 1:
            raise ConfigError("gamma must be >= 1")
        if not 0.0 <= self.prune_r < 1.0:
            raise ConfigError("prune_r must lie in [0, 1)")


@dataclass
class RunConfig:
    """Everything a Monte-Carlo experiment needs, JSON round-trippable."""

    scenario: Scenario = field(default_factory=default_scenario)
    motion: MotionConfig = field(default_factory=default_motion)
    sensor: SensorConfig = field(default_factory=default_sensor)
    filter_params: FilterParams = field(default_factory=FilterParams)
    ue_init: UEState = field(default_factory=default_ue_init)
    ue_init_cov: np.ndarray = field(default_factory=default_ue_cov)
    lm_prior_var: float = DEFAULT_LM_PRIOR_VAR
    steps: int = DEFAULT_STEPS
    runs: int = 100
    base_seed: int = 0
    doppler: bool = True
    noisy_truth: bool = True

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")


def config_to_dict(cfg: RunConfig) -> dict:
    """JSON-serializable echo of a run configuration."""
    return {
        "scenario": {
            "bs_m": list(cfg.scenario.bs.position),
            "vas_m": [list(lm.position) for lm in cfg.scenario.landmarks
                      if lm.kind is LandmarkKind.VA],
            "sps_m": [list(lm.position) for lm in cfg.scenario.landmarks
                      if lm.kind is LandmarkKind.SP],
        },
        "motion": {
            "speed_mps": cfg.motion.speed,
            "turn_rate_radps": cfg.motion.turn_rate,
            "period_s": cfg.motion.period,
            "process_noise_diag": list(np.diag(cfg.motion.process_noise)),
        },
        "sensor": {
            "range_var_m2": cfg.sensor.range_var,
            "angle_var_rad2": cfg.sensor.angle_var,
            "sigma_d_mps": cfg.sensor.sigma_d,
            "detection_prob": cfg.sensor.detection_prob,
            "clutter_rate": cfg.sensor.clutter_rate,
            "clutter_region": [list(b) for b in cfg.sensor.clutter_region],
        },
        "filter": {
            "gamma": cfg.filter_params.gamma,
            "prune_r": cfg.filter_params.prune_r,
            "gate_radius": cfg.filter_params.gate_radius,
            "max_components": cfg.filter_params.max_components,
            "report_r": cfg.filter_params.report_r,
            "kind_prune": cfg.filter_params.kind_prune,
            "ppp_birth_count_va": cfg.filter_params.ppp_birth_count_va,
            "ppp_birth_count_sp": cfg.filter_params.ppp_birth_count_sp,
            "birth_region_volume_m3": cfg.filter_params.birth_region_volume,
        },
        "ue_init": {
            "state": list(cfg.ue_init.as_array()),
            "cov_diag": list(np.diag(cfg.ue_init_cov)),
        },
        "lm_prior_var_m2": cfg.lm_prior_var,
        "steps": cfg.steps,
        "runs": cfg.runs,
        "base_seed": cfg.base_seed,
        "doppler": cfg.doppler,
        "noisy_truth": cfg.noisy_truth,
    }


def config_from_dict(data: dict) -> RunConfig:
    """Build a RunConfig from a (possibly partial) JSON dictionary."""
    try:
        base = config_to_dict(RunConfig())
        merged = {}
        for key, default_val in base.items():
            val = data.get(key, default_val)
            if isinstance(default_val, dict):
                sub = dict(default_val)
                sub.update(val or {})
                merged[key] = sub
            else:
                merged[key] = val
        sc = merged["scenario"]
        lms = [Landmark(p, LandmarkKind.VA) for p in sc["vas_m"]]
        lms += [Landmark(p, LandmarkKind.SP) for p in sc["sps_m"]]
        scenario = Scenario(bs=Landmark(sc["bs_m"], LandmarkKind.BS), landmarks=lms)
        mo = merged["motion"]
        motion = MotionConfig(speed=float(mo["speed_mps"]),
                              turn_rate=float(mo["turn_rate_radps"]),
                              period=float(mo["period_s"]),
                              process_noise=np.diag(mo["process_noise_diag"]))
        se = merged["sensor"]
        sensor = SensorConfig(range_var=float(se["range_var_m2"]),
                              angle_var=float(se["angle_var_rad2"]),
                              sigma_d=float(se["sigma_d_mps"]),
                              detection_prob=float(se["detection_prob"]),
                              clutter_rate=float(se["clutter_rate"]),
                              clutter_region=np.asarray(se["clutter_region"], dtype=float),
                              with_doppler=True)
        fi = merged["filter"]
        fparams = FilterParams(
            gamma=int(fi["gamma"]), prune_r=float(fi["prune_r"]),
            gate_radius=float(fi["gate_radius"]),
            max_components=int(fi["max_components"]),
            report_r=float(fi["report_r"]), kind_prune=float(fi["kind_prune"]),
            ppp_birth_count_va=float(fi["ppp_birth_count_va"]),
            ppp_birth_count_sp=float(fi["ppp_birth_count_sp"]),
            birth_region_volume=float(fi["birth_region_volume_m3"]))
        ui = merged["ue_init"]
        return RunConfig(
            scenario=scenario, motion=motion, sensor=sensor, filter_params=fparams,
            ue_init=UEState.from_array(ui["state"]),
            ue_init_cov=np.diag(ui["cov_diag"]),
            lm_prior_var=float(merged["lm_prior_var_m2"]),
            steps=int(merged["steps"]), runs=int(merged["runs"]),
            base_seed=int(merged["base_seed"]), doppler=bool(merged["doppler"]),
            noisy_truth=bool(merged["noisy_truth"]))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return config_from_dict(data)
