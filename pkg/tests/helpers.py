"""Shared builders for tests."""

import math
from pathlib import Path

import numpy as np

from proto3d.scene_lang import Cone, Cuboid, Cylinder, Material, PartNode, Pose, SceneProgram, Sphere, Torus, parse_program

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "proto3d" / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

# the chair layout used by the shipped fixtures: dims (l, w, h), centre
CHAIR_LAYOUT = {
    "Leg1": ((0.065, 0.065, 0.45), (0.04, 0.0325, 0.23)),
    "Leg2": ((0.065, 0.065, 0.45), (0.5, 0.0325, 0.23)),
    "Leg3": ((0.065, 0.065, 0.45), (0.04, 0.5675, 0.23)),
    "Leg4": ((0.065, 0.065, 0.45), (0.5, 0.5675, 0.23)),
    "Seat": ((0.6, 0.6, 0.1), (0.3, 0.3, 0.5)),
    "Backrest": ((0.1, 0.6, 0.45), (0.05, 0.3, 0.775)),
}


def make_chair() -> SceneProgram:
    return SceneProgram(
        tuple(PartNode(k, Cuboid(d), Pose(p, (0, 0, 0)), Material()) for k, (d, p) in CHAIR_LAYOUT.items())
    )


def one_part(kind: str, pos=(0, 0, 0), rot=(0, 0, 0), label="p") -> SceneProgram:
    return parse_program(f'part "{label}" {{ {kind} pos {list(pos)} rot {list(rot)} }}')


def random_rotation(rng) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


KINDS = [Cuboid((0.5, 0.3, 0.2)), Cylinder(0.2, 0.6), Sphere(0.35), Cone(0.3, 0.5), Torus(0.4, 0.1)]


def textbook_area(kind):
    """Closed-form areas written out independently of the package."""
    if isinstance(kind, Cuboid):
        a, b, c = kind.dims
        return 2 * (a * b + a * c + b * c)
    if isinstance(kind, Sphere):
        return 4 * math.pi * kind.radius**2
    if isinstance(kind, Cylinder):
        return 2 * math.pi * kind.radius * (kind.radius + kind.height)
    if isinstance(kind, Cone):
        return math.pi * kind.radius * (kind.radius + math.sqrt(kind.radius**2 + kind.height**2))
    return (2 * math.pi * kind.major_radius) * (2 * math.pi * kind.minor_radius)


def posed_all_kinds():
    return SceneProgram(
        tuple(
            PartNode(f"k{i}", kind, Pose((1.5 * i, 0.2 * i, -0.1 * i), (0.4 * i, -0.3, 0.2 * i)))
            for i, kind in enumerate(KINDS)
        )
    )


# acceptance criterion number -> (passed, one-line detail); printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
