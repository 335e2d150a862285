"""Geometric measurement model for bistatic radio SLAM.

Maps (UE state, landmark) to channel parameters: pseudo-range, AOA/AOD
azimuth and elevation, and Doppler. All delays are carried as pseudo-ranges
in meters (clock bias included as c*offset), Doppler in m/s, angles in rad.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, InfeasibleBirth, InvalidKind

_EPS = 1e-12


def wrap_angle(a):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), 2.0 * np.pi)


class LandmarkKind(enum.Enum):
    BS = "BS"
    VA = "VA"
    SP = "SP"


@dataclass(frozen=True)
class UEState:
    """Planar UE state: position (m), heading (rad), clock bias (m)."""

    x: float
    y: float
    heading: float
    clock_bias: float

    def __post_init__(self):
        vals = (self.x, self.y, self.heading, self.clock_bias)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite UE state {vals}")
        object.__setattr__(self, "heading", float(wrap_angle(self.heading)))

    def position3(self) -> np.ndarray:
        """3D position on the x-y plane."""
        return np.array([self.x, self.y, 0.0])

    def velocity3(self, speed: float) -> np.ndarray:
        """3D velocity for a given speed along the heading."""
        return np.array(
            [speed * math.cos(self.heading), speed * math.sin(self.heading), 0.0]
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading, self.clock_bias])

    @staticmethod
    def from_array(s) -> "UEState":
        s = np.asarray(s, dtype=float)
        return UEState(s[0], s[1], s[2], s[3])


@dataclass(frozen=True, eq=False)
class Landmark:
    """A map element: 3D position plus type tag."""

    position: np.ndarray
    kind: LandmarkKind

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        if not np.all(np.isfinite(pos)):
            raise ValueError(f"non-finite landmark position {pos}")
        pos.flags.writeable = False
        object.__setattr__(self, "position", pos)
        if not isinstance(self.kind, LandmarkKind):
            object.__setattr__(self, "kind", LandmarkKind(self.kind))


@dataclass(frozen=True, eq=False)
class Scenario:
    """One known BS plus the unknown VA/SP landmarks."""

    bs: Landmark
    landmarks: tuple = field(default_factory=tuple)
    speed_of_light: float = 299792458.0

    def __post_init__(self):
        object.__setattr__(self, "landmarks", tuple(self.landmarks))
        if self.bs.kind is not LandmarkKind.BS:
            raise InvalidKind("scenario anchor must have kind BS")
        for lm in self.landmarks:
            if lm.kind is LandmarkKind.BS:
                raise InvalidKind("exactly one BS allowed")
        pts = [self.bs.position] + [lm.position for lm in self.landmarks]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(pts[i] - pts[j]) < _EPS:
                    raise ValueError("landmark positions must be pairwise distinct")

    def all_landmarks(self) -> list:
        """BS first, then the unknown landmarks (scenario order)."""
        return [self.bs] + list(self.landmarks)


@dataclass(frozen=True)
class Measurement:
    """Channel parameters of one path.

    range_m includes the clock bias; doppler is None when the sensing
    configuration omits it.
    """

    range_m: float
    aoa_az: float
    aoa_el: float
    aod_az: float
    aod_el: float
    doppler: float | None = None

    def __post_init__(self):
        if not self.range_m > 0.0:
            raise ValueError(f"range must be positive, got {self.range_m}")

    def as_array(self, with_doppler: bool | None = None) -> np.ndarray:
        want = self.doppler is not None if with_doppler is None else with_doppler
        base = [self.range_m, self.aoa_az, self.aoa_el, self.aod_az, self.aod_el]
        if want:
            if self.doppler is None:
                raise ValueError("measurement carries no Doppler component")
            base.append(self.doppler)
        return np.array(base)

    @staticmethod
    def from_array(z) -> "Measurement":
        z = np.asarray(z, dtype=float)
        dop = float(z[5]) if z.shape[0] >= 6 else None
        return Measurement(float(z[0]), float(z[1]), float(z[2]), float(z[3]),
                           float(z[4]), dop)


def _unit(w: np.ndarray) -> tuple[np.ndarray, float]:
    n = float(np.linalg.norm(w))
    if n < 1e-9:
        raise DegenerateGeometry("zero-length direction vector")
    return w / n, n


def incidence_point(landmark: Landmark, bs_pos, ue_pos) -> np.ndarray:
    """Point where the NLOS path touches the environment.

    SPs scatter at their own location. For a VA the reflecting surface is the
    perpendicular bisector plane of BS->VA, and the incidence point is the
    intersection of the UE->VA segment with that plane.
    """
    bs_pos = np.asarray(bs_pos, dtype=float)
    ue_pos = np.asarray(ue_pos, dtype=float)
    if landmark.kind is LandmarkKind.SP:
        return landmark.position.copy()
    if landmark.kind is not LandmarkKind.VA:
        raise InvalidKind("incidence point undefined for the BS (LOS path)")
    va = landmark.position
    n = va - bs_pos  # unnormalized plane normal; cancels in the ratio below
    mid = 0.5 * (bs_pos + va)
    line = va - ue_pos
    den = float(np.dot(line, n))
    if abs(den) < 1e-9 * max(1.0, float(np.dot(n, n))):
        raise DegenerateGeometry("UE->VA line parallel to the reflecting plane")
    t = float(np.dot(mid - ue_pos, n)) / den
    # t < 1 always (the bisector midpoint sits behind the VA); t < 0 puts the
    # UE behind the reflecting surface, where no specular path exists
    if t < -1e-12:
        raise DegenerateGeometry("UE behind the reflecting surface")
    return ue_pos + t * line


def aoa_direction(landmark: Landmark, ue_pos: np.ndarray, bs_pos: np.ndarray):
    """Global-frame unit arrival direction and its path geometry.

    Returns (q_aoa, rho, x_inc) with rho the UE-to-reference distance used in
    Doppler derivatives: the BS / VA mirror point / SP distance.
    """
    if landmark.kind is LandmarkKind.BS:
        q, rho = _unit(landmark.position - ue_pos)
        return q, rho, landmark.position.copy()
    x_inc = incidence_point(landmark, bs_pos, ue_pos)
    if landmark.kind is LandmarkKind.VA:
        # q points along UE->incidence which lies on the UE->VA segment
        q, rho = _unit(landmark.position - ue_pos)
    else:
        q, rho = _unit(x_inc - ue_pos)
    return q, rho, x_inc


def _azimuth(q: np.ndarray) -> float:
    return math.atan2(q[1], q[0])


def _elevation(q: np.ndarray) -> float:
    return math.asin(min(1.0, max(-1.0, float(q[2]))))


def measure_array(landmark: Landmark, ue: UEState, speed: float,
                  bs_pos: np.ndarray, with_doppler: bool = True) -> np.ndarray:
    """Noiseless measurement vector [range, aoa_az, aoa_el, aod_az, aod_el(, d)]."""
    u = ue.position3()
    q_aoa, _, x_inc = aoa_direction(landmark, u, bs_pos)
    if landmark.kind is LandmarkKind.BS:
        rng = float(np.linalg.norm(landmark.position - u)) + ue.clock_bias
        q_aod, _ = _unit(u - bs_pos)
    else:
        rng = (float(np.linalg.norm(x_inc - u))
               + float(np.linalg.norm(x_inc - bs_pos)) + ue.clock_bias)
        q_aod, _ = _unit(x_inc - bs_pos)
    z = [
        rng,
        float(wrap_angle(_azimuth(q_aoa) - ue.heading)),
        _elevation(q_aoa),
        _azimuth(q_aod),
        _elevation(q_aod),
    ]
    if with_doppler:
        z.append(float(np.dot(ue.velocity3(speed), q_aoa)))
    return np.array(z)


def measure(landmark: Landmark, ue: UEState, speed: float, bs_pos,
            with_doppler: bool = True) -> Measurement:
    """Noiseless channel parameters of the path via `landmark`.

    Doppler is positive when the UE approaches the landmark.
    """
    z = measure_array(landmark, ue, speed, np.asarray(bs_pos, dtype=float),
                      with_doppler)
    return Measurement.from_array(z)


def aoa_unit_vector(aoa_az: float, aoa_el: float, heading: float) -> np.ndarray:
    """Reconstruct the global-frame AOA direction from UE-frame angles."""
    az = aoa_az + heading
    ce = math.cos(aoa_el)
    return np.array([ce * math.cos(az), ce * math.sin(az), math.sin(aoa_el)])


def birth_position(z: Measurement, ue: UEState, bs_pos, kind: LandmarkKind) -> np.ndarray:
    """Invert range + AOA into a candidate landmark position of a given kind.

    VA: one leg of length (range - bias) along the arrival direction.
    SP: the two-leg range equation pins the scatterer on the BS/UE ellipse.
    """
    bs_pos = np.asarray(bs_pos, dtype=float)
    if kind is LandmarkKind.BS:
        raise InvalidKind("the BS position is known; no birth for kind BS")
    q = aoa_unit_vector(z.aoa_az, z.aoa_el, ue.heading)
    u = ue.position3()
    r_total = z.range_m - ue.clock_bias
    if kind is LandmarkKind.VA:
        if r_total <= 0.0:
            raise InfeasibleBirth(f"non-positive bias-free range {r_total}")
        return u + r_total * q
    d_vec = u - bs_pos
    d_norm = float(np.linalg.norm(d_vec))
    if r_total <= d_norm:
        raise InfeasibleBirth(
            f"bias-free range {r_total:.3f} m inside the BS-UE baseline {d_norm:.3f} m"
        )
    r = (r_total**2 - d_norm**2) / (2.0 * (r_total + float(np.dot(q, d_vec))))
    if r <= 0.0:
        raise InfeasibleBirth(f"non-positive scatterer leg {r}")
    return u + r * q
