"""ProtoScene: the primitive scene language prototypes are written in."""

from .model import (
    DEFAULT_ALBEDO,
    Arrangement,
    ArrangementEntry,
    Cone,
    Cuboid,
    Cylinder,
    Diagnostic,
    Material,
    PartNode,
    Pose,
    Primitive,
    SceneProgram,
    Sphere,
    Torus,
    Vec3,
    normalize_angle,
)
from .ops import InvalidArrangement, arrangement_to_program, serialize_program, validate
from .parser import (
    DuplicateLabel,
    NonFiniteValue,
    NonPositiveDimension,
    SceneSyntaxError,
    parse_program,
)

__all__ = [
    "DEFAULT_ALBEDO",
    "Arrangement",
    "ArrangementEntry",
    "Cone",
    "Cuboid",
    "Cylinder",
    "Diagnostic",
    "DuplicateLabel",
    "InvalidArrangement",
    "Material",
    "NonFiniteValue",
    "NonPositiveDimension",
    "PartNode",
    "Pose",
    "Primitive",
    "SceneProgram",
    "SceneSyntaxError",
    "Sphere",
    "Torus",
    "Vec3",
    "arrangement_to_program",
    "normalize_angle",
    "parse_program",
    "serialize_program",
    "validate",
]
