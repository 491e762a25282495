"""Value types for ProtoScene programs.

All types are frozen dataclasses holding plain floats/tuples so programs can be
hashed, compared structurally and shared between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

Vec3 = tuple[float, float, float]

DEFAULT_ALBEDO: Vec3 = (0.45, 0.5, 0.6)


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]. Non-finite values pass through untouched."""
    if not math.isfinite(a):
        return a
    r = math.remainder(a, 2.0 * math.pi)
    if r <= -math.pi:
        r = math.pi
    return r


def _vec3(v) -> Vec3:
    x, y, z = v
    return (float(x), float(y), float(z))


@dataclass(frozen=True)
class Cuboid:
    # [length (x), width (y), height (z)]
    dims: Vec3

    def __post_init__(self):
        object.__setattr__(self, "dims", _vec3(self.dims))

    kind = "cuboid"

    def params(self) -> dict[str, float]:
        return {"dims.x": self.dims[0], "dims.y": self.dims[1], "dims.z": self.dims[2]}


@dataclass(frozen=True)
class Cylinder:
    radius: float
    height: float

    kind = "cylinder"

    def params(self) -> dict[str, float]:
        return {"radius": self.radius, "height": self.height}


@dataclass(frozen=True)
class Sphere:
    radius: float

    kind = "sphere"

    def params(self) -> dict[str, float]:
        return {"radius": self.radius}


@dataclass(frozen=True)
class Cone:
    """Solid cone, axis along local +z: base disk at z=-h/2, apex at z=+h/2."""

    radius: float
    height: float

    kind = "cone"

    def params(self) -> dict[str, float]:
        return {"radius": self.radius, "height": self.height}


@dataclass(frozen=True)
class Torus:
    """Ring torus lying in the local xy-plane."""

    major_radius: float
    minor_radius: float

    kind = "torus"

    def params(self) -> dict[str, float]:
        return {"major_radius": self.major_radius, "minor_radius": self.minor_radius}


Primitive = Union[Cuboid, Cylinder, Sphere, Cone, Torus]


@dataclass(frozen=True)
class Pose:
    """Part placement: centre position plus intrinsic XYZ Euler angles (radians).

    Rotation components are wrapped into (-pi, pi] on construction.
    """

    position: Vec3 = (0.0, 0.0, 0.0)
    rotation: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        rot = tuple(normalize_angle(a) for a in _vec3(self.rotation))
        object.__setattr__(self, "rotation", rot)


@dataclass(frozen=True)
class Material:
    albedo: Vec3 = DEFAULT_ALBEDO

    def __post_init__(self):
        object.__setattr__(self, "albedo", _vec3(self.albedo))


@dataclass(frozen=True)
class PartNode:
    label: str
    kind: Primitive
    pose: Pose = field(default_factory=Pose)
    material: Material = field(default_factory=Material)


@dataclass(frozen=True)
class SceneProgram:
    parts: tuple[PartNode, ...] = ()
    canvas: Vec3 | None = None

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.canvas is not None:
            object.__setattr__(self, "canvas", _vec3(self.canvas))

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.parts]

    def part(self, label: str) -> PartNode:
        for p in self.parts:
            if p.label == label:
                return p
        raise KeyError(label)

    def replace_part(self, label: str, new: PartNode) -> SceneProgram:
        parts = tuple(new if p.label == label else p for p in self.parts)
        return SceneProgram(parts, self.canvas)


@dataclass(frozen=True)
class ArrangementEntry:
    """One parametrized cuboid of a Designer layout: dims are (length, width, height)."""

    label: str
    dims: Vec3
    position: Vec3
    rotation: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "dims", _vec3(self.dims))
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "rotation", _vec3(self.rotation))


@dataclass(frozen=True)
class Arrangement:
    entries: tuple[ArrangementEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, label: str) -> ArrangementEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    part: str | None
    field: str | None
    message: str = ""

    def __str__(self) -> str:
        where = ".".join(x for x in (self.part, self.field) if x)
        return f"{self.code}({where}): {self.message}" if where else f"{self.code}: {self.message}"
