import math
from dataclasses import dataclass, replace

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

MU0 = 4.0e-7 * math.pi
TWO_PI = 2.0 * math.pi
MAX_MAGNETIZATION = 1e9
GEOM_REL_EPS = 1e-9


def _finite_vector(value, name):
    vector = tuple(float(v) for v in value)
    if len(vector) != 3:
        raise ValueError(f"{name} must have three components")
    if not all(math.isfinite(v) for v in vector):
        raise ValueError(f"{name} must be finite")
    return vector


class Tile(BaseModel):
    """Homogeneously magnetized cylindrical tile, SI units, angles in radians.

    ``offset`` is the global position of the tile's cylinder-axis origin.
    A zero angular span (theta1 == theta2) is an empty tile.
    """

    model_config = ConfigDict(frozen=True)

    r1: float
    r2: float
    theta1: float
    theta2: float
    z1: float
    z2: float
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    magnetization: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @field_validator("r1", "r2", "theta1", "theta2", "z1", "z2")
    @classmethod
    def _validate_finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("tile bounds must be finite")
        return value

    @field_validator("offset")
    @classmethod
    def _validate_offset(cls, value):
        return _finite_vector(value, "offset")

    @field_validator("magnetization")
    @classmethod
    def _validate_magnetization(cls, value):
        vector = _finite_vector(value, "magnetization")
        if any(abs(v) >= MAX_MAGNETIZATION for v in vector):
            raise ValueError("magnetization components must stay below 1e9 A/m")
        return vector

    @model_validator(mode="after")
    def _validate_bounds(self):
        if not 0.0 <= self.r1 < self.r2:
            raise ValueError("radii must satisfy 0 <= r1 < r2")
        if not self.z1 < self.z2:
            raise ValueError("heights must satisfy z1 < z2")
        if not self.theta1 <= self.theta2:
            raise ValueError("angles must satisfy theta1 <= theta2")
        if self.theta2 - self.theta1 > TWO_PI * (1.0 + 1e-15):
            raise ValueError("angular span must not exceed 2*pi")
        return self

    @property
    def span(self):
        return self.theta2 - self.theta1

    @property
    def is_empty(self):
        return self.span == 0.0

    @property
    def is_full_ring(self):
        return abs(self.span - TWO_PI) < 1e-12

    @property
    def characteristic_length(self):
        return max(self.r2, self.z2 - self.z1)

    @property
    def eps_geom(self):
        return GEOM_REL_EPS * self.characteristic_length

    @property
    def volume(self):
        return 0.5 * self.span * (self.r2**2 - self.r1**2) * (self.z2 - self.z1)

    def magnetization_vector(self):
        return np.array(self.magnetization, dtype=float)

    def centroid(self):
        """Volume centroid in the global frame."""
        offset = np.array(self.offset, dtype=float)
        zc = 0.5 * (self.z1 + self.z2)
        if self.is_empty:
            return offset + np.array([0.0, 0.0, zc])
        half = 0.5 * self.span
        mid = self.theta1 + half
        radial = (2.0 / 3.0) * (self.r2**3 - self.r1**3) / (self.r2**2 - self.r1**2)
        radial *= math.sin(half) / half
        return offset + np.array([radial * math.cos(mid), radial * math.sin(mid), zc])

    def with_magnetization(self, magnetization):
        return self.model_copy(update={"magnetization": _finite_vector(magnetization, "magnetization")})


class EvalPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    z: float

    @field_validator("x", "y", "z")
    @classmethod
    def _validate_finite(cls, value):
        if not math.isfinite(value):
            raise ValueError("point coordinates must be finite")
        return value

    @classmethod
    def of(cls, xyz):
        x, y, z = (float(v) for v in xyz)
        return cls(x=x, y=y, z=z)

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    def shifted(self, delta):
        return EvalPoint(x=self.x + float(delta[0]), y=self.y + float(delta[1]), z=self.z + float(delta[2]))


@dataclass(frozen=True)
class CanonicalPoint:
    """Evaluation point after rotating by ``psi`` about the tile axis: it sits at (x_c, 0, 0)."""

    x_c: float
    psi: float
    z_shift: float


@dataclass(frozen=True)
class CanonicalArgs:
    """Integration limits seen from the canonical point (x, 0, 0)."""

    x: float
    r_lo: float
    r_hi: float
    th_lo: float
    th_hi: float
    z_lo: float
    z_hi: float

    @property
    def characteristic_length(self):
        return max(self.r_hi, self.z_hi - self.z_lo)

    def moved(self, dx=0.0, dz=0.0):
        """Limits after moving the point by dx radially and dz axially."""
        return replace(self, x=self.x + dx, z_lo=self.z_lo - dz, z_hi=self.z_hi - dz)


def canonicalize(point, tile):
    dx = point.x - tile.offset[0]
    dy = point.y - tile.offset[1]
    dz = point.z - tile.offset[2]
    x_c = math.hypot(dx, dy)
    psi = math.atan2(dy, dx)
    if psi <= -math.pi:
        psi = math.pi
    canonical = CanonicalPoint(x_c=x_c, psi=psi, z_shift=dz)
    args = CanonicalArgs(
        x=x_c,
        r_lo=tile.r1,
        r_hi=tile.r2,
        th_lo=tile.theta1 - psi,
        th_hi=tile.theta2 - psi,
        z_lo=tile.z1 - dz,
        z_hi=tile.z2 - dz,
    )
    return canonical, args


def rotation_z(psi):
    c = math.cos(psi)
    s = math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate_tensor_back(n_local, psi):
    rotation = rotation_z(psi)
    return rotation @ np.asarray(n_local, dtype=float) @ rotation.T


def units_convert(mu0_m_tesla):
    return np.asarray(mu0_m_tesla, dtype=float) / MU0


def spherical_magnetization(mu0_m_magnitude, azimuth, polar):
    """Magnetization (A/m) from mu0|M| in tesla and spherical angles in radians."""
    direction = np.array([
        math.sin(polar) * math.cos(azimuth),
        math.sin(polar) * math.sin(azimuth),
        math.cos(polar),
    ])
    return units_convert(mu0_m_magnitude * direction)


def classify_point(tile, point):
    """Return (inside, on_surface); points within eps_geom of a face count as outside."""
    if tile.is_empty:
        return False, False
    eps = tile.eps_geom
    dx = point.x - tile.offset[0]
    dy = point.y - tile.offset[1]
    dz = point.z - tile.offset[2]
    r = math.hypot(dx, dy)

    # A solid tile (r1 == 0) has no inner face.
    radial_gap = tile.r2 - r if tile.r1 == 0.0 else min(r - tile.r1, tile.r2 - r)
    axial_gap = min(dz - tile.z1, tile.z2 - dz)
    if tile.is_full_ring:
        angular_gap = math.inf
    else:
        offset_angle = (math.atan2(dy, dx) - tile.theta1) % TWO_PI
        if offset_angle > tile.span:
            # Outside the wedge: distance to the nearer face, negative.
            angular_gap = -min(offset_angle - tile.span, TWO_PI - offset_angle) * r
        else:
            angular_gap = min(offset_angle, tile.span - offset_angle) * r
        if tile.r1 == 0.0 and r <= eps:
            angular_gap = 0.0

    gaps = (radial_gap, axial_gap, angular_gap)
    if min(gaps) > eps:
        return True, False
    within_closure = all(gap >= -eps for gap in gaps)
    return False, within_closure


def segmented_ring(segments, r1, r2, z1, z2, magnitude, wave_number=2, phase=0.0, theta0=0.0, offset=(0.0, 0.0, 0.0)):
    """Split [theta0, theta0 + 2 pi) into equal tiles magnetized in-plane.

    Segment i points at wave_number * theta_mid + phase; ``magnitude`` is |M| in A/m.
    wave_number 2 gives a dipolar Halbach ring, 0 a uniformly magnetized one.
    """
    if segments < 1:
        raise ValueError("a ring needs at least one segment")
    width = TWO_PI / segments
    tiles = []
    for index in range(segments):
        start = theta0 + index * width
        # Last edge pinned so the segments close the ring exactly.
        stop = theta0 + TWO_PI if index == segments - 1 else theta0 + (index + 1) * width
        direction = wave_number * (0.5 * (start + stop)) + phase
        tiles.append(
            Tile(
                r1=r1,
                r2=r2,
                theta1=start,
                theta2=stop,
                z1=z1,
                z2=z2,
                offset=tuple(offset),
                magnetization=(magnitude * math.cos(direction), magnitude * math.sin(direction), 0.0),
            )
        )
    return tiles
