"""Scene files: tiles, rings, samplings and output settings.

A scene is JSON with a schema version. Lengths are in the scene's ``units``
(mm or m, declared once), angles in degrees unless ``radians`` is true, and
magnetization as mu0*M in tesla, M in A/m, or spherical (mu0|M| plus two
angles).
"""

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from tiletensor.geometry import Tile, segmented_ring, spherical_magnetization, units_convert

SCHEMA_VERSION = 1
LENGTH_SCALE = {"mm": 1e-3, "m": 1.0}

Vector3 = tuple[float, float, float]


class SceneError(ValueError):
    pass


def format_validation_error(exc, prefix=""):
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in (prefix, *error["loc"]) if item != "")
        parts.append(f"{location or '<scene>'}: {error['msg']}")
    return "; ".join(parts)


def _angle_scale(radians):
    return 1.0 if radians else math.pi / 180.0


class SphericalSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mu0_magnitude: float = Field(ge=0.0)
    azimuth: float
    polar: float


class TileSpec(BaseModel):
    """One tile as written in a scene or preset file; unset fields come from the preset."""

    model_config = ConfigDict(extra="forbid")

    preset: str | None = None
    r1: float | None = None
    r2: float | None = None
    theta1: float | None = None
    theta2: float | None = None
    z1: float | None = None
    z2: float | None = None
    offset: Vector3 | None = None
    mu0_magnetization: Vector3 | None = None
    magnetization: Vector3 | None = None
    spherical: SphericalSpec | None = None

    @model_validator(mode="after")
    def _validate_single_magnetization(self):
        given = [
            name
            for name in ("mu0_magnetization", "magnetization", "spherical")
            if getattr(self, name) is not None
        ]
        if len(given) > 1:
            raise ValueError(f"give at most one of {', '.join(given)}")
        return self

    def to_si(self, units, radians=False):
        length = LENGTH_SCALE[units]
        angle = _angle_scale(radians)
        fields = {}
        for name in ("r1", "r2", "z1", "z2"):
            value = getattr(self, name)
            if value is not None:
                fields[name] = value * length
        for name in ("theta1", "theta2"):
            value = getattr(self, name)
            if value is not None:
                fields[name] = value * angle
        if self.offset is not None:
            fields["offset"] = tuple(v * length for v in self.offset)
        if self.mu0_magnetization is not None:
            fields["magnetization"] = tuple(float(v) for v in units_convert(self.mu0_magnetization))
        elif self.magnetization is not None:
            fields["magnetization"] = tuple(self.magnetization)
        elif self.spherical is not None:
            vector = spherical_magnetization(
                self.spherical.mu0_magnitude,
                self.spherical.azimuth * angle,
                self.spherical.polar * angle,
            )
            fields["magnetization"] = tuple(float(v) for v in vector)
        return fields


class RingSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: int = Field(ge=1)
    r1: float
    r2: float
    z1: float
    z2: float
    mu0_magnitude: float = Field(ge=0.0)
    wave_number: int = 2
    phase: float = 0.0
    theta0: float = 0.0
    offset: Vector3 = (0.0, 0.0, 0.0)

    def build(self, units, radians=False):
        length = LENGTH_SCALE[units]
        angle = _angle_scale(radians)
        return segmented_ring(
            self.segments,
            self.r1 * length,
            self.r2 * length,
            self.z1 * length,
            self.z2 * length,
            float(units_convert(self.mu0_magnitude)),
            wave_number=self.wave_number,
            phase=self.phase * angle,
            theta0=self.theta0 * angle,
            offset=tuple(v * length for v in self.offset),
        )


class LineSampling(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["line"]
    start: Vector3
    end: Vector3
    count: int = Field(ge=1)

    def points(self):
        start = np.array(self.start, dtype=float)
        end = np.array(self.end, dtype=float)
        if self.count == 1:
            return start[None, :]
        steps = np.linspace(0.0, 1.0, self.count)[:, None]
        return start + steps * (end - start)


class GridSampling(BaseModel):
    """Points origin + sum_k i_k / (n_k - 1) * axes[k], first axis slowest."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["grid"]
    origin: Vector3
    axes: list[Vector3] = Field(min_length=1, max_length=3)
    counts: list[int] = Field(min_length=1, max_length=3)

    @field_validator("counts")
    @classmethod
    def _validate_counts(cls, value):
        if any(count < 1 for count in value):
            raise ValueError("grid counts must be >= 1")
        return value

    @model_validator(mode="after")
    def _validate_shape(self):
        if len(self.axes) != len(self.counts):
            raise ValueError("grid needs one count per axis")
        return self

    def points(self):
        origin = np.array(self.origin, dtype=float)
        axes = np.array(self.axes, dtype=float)
        rows = []
        for index in np.ndindex(*self.counts):
            fractions = [i / (n - 1) if n > 1 else 0.0 for i, n in zip(index, self.counts)]
            rows.append(origin + np.dot(fractions, axes))
        return np.array(rows)


class PointsSampling(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["points"]
    points_list: list[Vector3] = Field(alias="points", min_length=1)

    def points(self):
        return np.array(self.points_list, dtype=float)


class RandomSampling(BaseModel):
    """Uniform points in a box, reproducible through ``seed``."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["random"]
    low: Vector3
    high: Vector3
    count: int = Field(ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _validate_box(self):
        if not all(lo < hi for lo, hi in zip(self.low, self.high)):
            raise ValueError("random box needs low < high in every component")
        return self

    def points(self):
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=(self.count, 3))


Sampling = Annotated[
    Union[LineSampling, GridSampling, PointsSampling, RandomSampling],
    Field(discriminator="kind"),
]


class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str | None = None
    format: Literal["csv", "jsonl"] = "csv"


class Scene(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    units: Literal["mm", "m"]
    radians: bool = False
    tiles: list[TileSpec] = Field(default_factory=list)
    rings: list[RingSpec] = Field(default_factory=list)
    sampling: Sampling | None = None
    samplings: dict[str, Sampling] = Field(default_factory=dict)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("schema_version")
    @classmethod
    def _validate_schema_version(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value} (expected {SCHEMA_VERSION})")
        return value

    @model_validator(mode="after")
    def _validate_contents(self):
        if not self.tiles and not self.rings:
            raise ValueError("scene needs at least one tile or ring")
        if (self.sampling is None) == (not self.samplings):
            raise ValueError("give exactly one of sampling or samplings")
        return self

    @property
    def length_scale(self):
        return LENGTH_SCALE[self.units]

    def named_samplings(self):
        """Samplings keyed by name; a lone ``sampling`` is keyed by the empty string."""
        if self.sampling is not None:
            return {"": self.sampling}
        return dict(self.samplings)

    def sample_points(self):
        """Sample points per sampling, in meters."""
        return {name: sampling.points() * self.length_scale for name, sampling in self.named_samplings().items()}


def resolve_tiles(specs, units, radians=False, presets=None):
    """SI tiles from tile specs, filling unset fields from ``presets``."""
    presets = presets or {}
    tiles = []
    for index, spec in enumerate(specs):
        fields = {}
        if spec.preset is not None:
            if spec.preset not in presets:
                raise SceneError(f"tiles.{index}.preset: unknown preset {spec.preset!r}")
            fields.update(presets[spec.preset])
        fields.update(spec.to_si(units, radians))
        try:
            tiles.append(Tile(**fields))
        except ValidationError as exc:
            raise SceneError(format_validation_error(exc, prefix=f"tiles.{index}")) from exc
    return tiles


def build_tiles(scene, presets=None):
    """Resolve presets and rings into SI tiles."""
    tiles = resolve_tiles(scene.tiles, scene.units, scene.radians, presets)
    for index, ring in enumerate(scene.rings):
        try:
            tiles.extend(ring.build(scene.units, scene.radians))
        except ValidationError as exc:
            raise SceneError(format_validation_error(exc, prefix=f"rings.{index}")) from exc
    return tiles


def parse_scene(payload):
    try:
        return Scene.model_validate(payload)
    except ValidationError as exc:
        raise SceneError(format_validation_error(exc)) from exc


def load_scene(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"{path}: {exc.strerror or exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return parse_scene(payload)
    except SceneError as exc:
        raise SceneError(f"{path}: {exc}") from exc


def dump_scene(scene):
    return scene.model_dump(mode="json", by_alias=True, exclude_none=True)
