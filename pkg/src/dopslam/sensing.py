"""Measurement scan synthesis: noisy detections, misdetections, clutter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Measurement, Scenario, UEState, measure_array, wrap_angle

CLUTTER_LABEL = -1


@dataclass(frozen=True, eq=False)
class SensorConfig:
    """Noise, detection and clutter parameters of the channel estimator."""

    range_var: float = 1e-2  # m^2
    angle_var: float = 2.5e-3  # rad^2, shared by all four angles
    sigma_d: float = 0.1  # m/s
    detection_prob: float = 0.9
    clutter_rate: float = 1.0  # expected clutter measurements per scan
    clutter_region: np.ndarray = field(default_factory=lambda: np.array(
        [[0.0, 600.0], [-np.pi, np.pi], [-np.pi / 2, np.pi / 2],
         [-np.pi, np.pi], [-np.pi / 2, np.pi / 2], [-22.22, 22.22]]))
    with_doppler: bool = True

    def __post_init__(self):
        if not 0.0 <= self.detection_prob <= 1.0:
            raise ValueError("detection probability must lie in [0, 1]")
        if self.clutter_rate < 0.0:
            raise ValueError("clutter rate must be non-negative")
        if min(self.range_var, self.angle_var) < 0.0 or self.sigma_d < 0.0:
            raise ValueError("noise magnitudes must be non-negative")
        region = np.asarray(self.clutter_region, dtype=float).reshape(6, 2)
        region.flags.writeable = False
        object.__setattr__(self, "clutter_region", region)

    def meas_dim(self, with_doppler: bool | None = None) -> int:
        use = self.with_doppler if with_doppler is None else with_doppler
        return 6 if use else 5

    def noise_cov(self, with_doppler: bool | None = None) -> np.ndarray:
        """Per-path measurement covariance (diagonal template)."""
        diag = [self.range_var] + [self.angle_var] * 4 + [self.sigma_d**2]
        return np.diag(diag[: self.meas_dim(with_doppler)])

    def clutter_density(self, with_doppler: bool | None = None) -> float:
        """Clutter intensity per unit measurement volume (uniform model)."""
        dims = self.meas_dim(with_doppler)
        widths = self.clutter_region[:dims, 1] - self.clutter_region[:dims, 0]
        return self.clutter_rate / float(np.prod(widths))


@dataclass(frozen=True, eq=False)
class Scan:
    """One unordered set of measurements plus hidden truth labels.

    ``truth_assoc[i]`` is the index of the originating landmark in the
    scenario ordering (0 = BS) or -1 for clutter. Labels exist for
    diagnostics only and must never feed the filter.
    """

    zs: np.ndarray  # (n, dim)
    truth_assoc: np.ndarray  # (n,) int

    def __post_init__(self):
        zs = np.asarray(self.zs, dtype=float)
        labels = np.asarray(self.truth_assoc, dtype=int)
        if zs.shape[0] != labels.shape[0]:
            raise ValueError("one truth label per measurement required")
        zs.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "truth_assoc", labels)

    def __len__(self) -> int:
        return self.zs.shape[0]

    @property
    def measurements(self) -> list[Measurement]:
        return [Measurement.from_array(z) for z in self.zs]


def noiseless_scan_template(scenario: Scenario, ue_truth: UEState,
                            speed: float, with_doppler: bool = True) -> np.ndarray:
    """Noise-free measurement of every landmark (BS first), one row each."""
    bs_pos = scenario.bs.position
    return np.array([
        measure_array(lm, ue_truth, speed, bs_pos, with_doppler)
        for lm in scenario.all_landmarks()
    ])


def _draw_scan(template: np.ndarray, cfg: SensorConfig,
               rng: np.random.Generator) -> Scan:
    dim = cfg.meas_dim()
    noise_std = np.sqrt(np.diag(cfg.noise_cov()))
    detected = rng.random(template.shape[0]) < cfg.detection_prob
    rows = []
    labels = []
    for idx in np.flatnonzero(detected):
        z = template[idx] + noise_std * rng.standard_normal(dim)
        z[[1, 3]] = wrap_angle(z[[1, 3]])
        rows.append(z)
        labels.append(idx)
    n_clutter = rng.poisson(cfg.clutter_rate)
    lo = cfg.clutter_region[:dim, 0]
    hi = cfg.clutter_region[:dim, 1]
    for _ in range(n_clutter):
        rows.append(lo + (hi - lo) * rng.random(dim))
        labels.append(CLUTTER_LABEL)
    if rows:
        zs = np.vstack(rows)
        labels = np.asarray(labels, dtype=int)
        perm = rng.permutation(len(rows))
        zs = zs[perm]
        labels = labels[perm]
    else:
        zs = np.zeros((0, dim))
        labels = np.zeros(0, dtype=int)
    return Scan(zs=zs, truth_assoc=labels)


def generate_scan(scenario: Scenario, ue_truth: UEState, cfg: SensorConfig,
                  speed: float,
                  rng: np.random.Generator | int | None = None) -> Scan:
    """Synthesize one scan at the true UE state; deterministic given the seed."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    template = noiseless_scan_template(scenario, ue_truth, speed,
                                       cfg.with_doppler)
    return _draw_scan(template, cfg, gen)


def generate_scans(scenario: Scenario, ue_truth: UEState, cfg: SensorConfig,
                   speed: float, count: int,
                   rng: np.random.Generator | int | None = None) -> list[Scan]:
    """Batch of independent scans at one pose (template computed once)."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    template = noiseless_scan_template(scenario, ue_truth, speed,
                                       cfg.with_doppler)
    return [_draw_scan(template, cfg, gen) for _ in range(count)]
