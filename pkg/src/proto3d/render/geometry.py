"""Per-primitive geometry: rotations, signed distances, bounds, areas, centroids.

SDFs take separate coordinate arrays (x, y, z) in the part's local frame and
use only elementwise arithmetic, so a pixel's result never depends on how the
image was split into tiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..scene_lang import Cone, Cuboid, Cylinder, PartNode, SceneProgram, Sphere, Torus


class EmptyScene(ValueError):
    pass


def euler_xyz_matrix(rotation) -> np.ndarray:
    """Rotation matrix for intrinsic X-then-Y-then-Z Euler angles: R = Rx @ Ry @ Rz."""
    a, b, c = rotation
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cc, sc = math.cos(c), math.sin(c)
    rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]])
    ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    rz = np.array([[cc, -sc, 0], [sc, cc, 0], [0, 0, 1]])
    return rx @ ry @ rz


def _length3(x, y, z):
    return np.sqrt(x * x + y * y + z * z)


def _length2(x, y):
    return np.sqrt(x * x + y * y)


def sdf_local(kind, x, y, z):
    """Exact signed distance to ``kind`` centred at the local origin."""
    if isinstance(kind, Sphere):
        return _length3(x, y, z) - kind.radius
    if isinstance(kind, Cuboid):
        bx, by, bz = (0.5 * d for d in kind.dims)
        qx, qy, qz = np.abs(x) - bx, np.abs(y) - by, np.abs(z) - bz
        outside = _length3(np.maximum(qx, 0.0), np.maximum(qy, 0.0), np.maximum(qz, 0.0))
        inside = np.minimum(np.maximum(qx, np.maximum(qy, qz)), 0.0)
        return outside + inside
    if isinstance(kind, Cylinder):
        dr = _length2(x, y) - kind.radius
        dz = np.abs(z) - 0.5 * kind.height
        return np.minimum(np.maximum(dr, dz), 0.0) + _length2(np.maximum(dr, 0.0), np.maximum(dz, 0.0))
    if isinstance(kind, Torus):
        qx = _length2(x, y) - kind.major_radius
        return _length2(qx, z) - kind.minor_radius
    if isinstance(kind, Cone):
        return _sd_cone(x, y, z, kind.radius, kind.height)
    raise TypeError(f"unknown primitive {kind!r}")


def _sd_cone(x, y, z, r, height):
    # capped cone with bottom radius r at z=-h, top radius 0 at z=+h (h = half height)
    h = 0.5 * height
    qx = _length2(x, y)
    qy = z
    k1x, k1y = 0.0, h
    k2x, k2y = -r, 2.0 * h
    rim = np.where(qy < 0.0, r, 0.0)
    cax = qx - np.minimum(qx, rim)
    cay = np.abs(qy) - h
    k2dot = k2x * k2x + k2y * k2y
    tt = np.clip(((k1x - qx) * k2x + (k1y - qy) * k2y) / k2dot, 0.0, 1.0)
    cbx = qx - k1x + k2x * tt
    cby = qy - k1y + k2y * tt
    s = np.where((cbx < 0.0) & (cay < 0.0), -1.0, 1.0)
    return s * np.sqrt(np.minimum(cax * cax + cay * cay, cbx * cbx + cby * cby))


def local_half_extents(kind) -> np.ndarray:
    if isinstance(kind, Cuboid):
        return 0.5 * np.asarray(kind.dims)
    if isinstance(kind, Sphere):
        return np.full(3, kind.radius)
    if isinstance(kind, (Cylinder, Cone)):
        return np.array([kind.radius, kind.radius, 0.5 * kind.height])
    if isinstance(kind, Torus):
        rr = kind.major_radius + kind.minor_radius
        return np.array([rr, rr, kind.minor_radius])
    raise TypeError(f"unknown primitive {kind!r}")


def bounding_radius(kind) -> float:
    """Radius of a sphere about the pose origin enclosing the primitive."""
    if isinstance(kind, Cuboid):
        return 0.5 * math.sqrt(sum(d * d for d in kind.dims))
    if isinstance(kind, Sphere):
        return kind.radius
    if isinstance(kind, (Cylinder, Cone)):
        return math.hypot(kind.radius, 0.5 * kind.height)
    if isinstance(kind, Torus):
        return kind.major_radius + kind.minor_radius
    raise TypeError(f"unknown primitive {kind!r}")


def surface_area(kind) -> float:
    if isinstance(kind, Cuboid):
        a, b, c = kind.dims
        return 2.0 * (a * b + b * c + c * a)
    if isinstance(kind, Sphere):
        return 4.0 * math.pi * kind.radius**2
    if isinstance(kind, Cylinder):
        r, h = kind.radius, kind.height
        return 2.0 * math.pi * r * h + 2.0 * math.pi * r * r
    if isinstance(kind, Cone):
        r, h = kind.radius, kind.height
        return math.pi * r * r + math.pi * r * math.hypot(r, h)
    if isinstance(kind, Torus):
        return 4.0 * math.pi**2 * kind.major_radius * kind.minor_radius
    raise TypeError(f"unknown primitive {kind!r}")


def local_centroid(kind) -> np.ndarray:
    """Volumetric centroid in the local frame; only the cone is off-origin (h/4 above its base)."""
    if isinstance(kind, Cone):
        return np.array([0.0, 0.0, -0.25 * kind.height])
    return np.zeros(3)


@dataclass(frozen=True)
class PosedPart:
    """A part with its rotation matrix precomputed."""

    node: PartNode
    rotation: np.ndarray
    position: np.ndarray

    @classmethod
    def from_node(cls, node: PartNode) -> PosedPart:
        return cls(node, euler_xyz_matrix(node.pose.rotation), np.asarray(node.pose.position, dtype=float))

    def to_local(self, x, y, z):
        r = self.rotation
        dx, dy, dz = x - self.position[0], y - self.position[1], z - self.position[2]
        # R^T applied componentwise
        lx = r[0, 0] * dx + r[1, 0] * dy + r[2, 0] * dz
        ly = r[0, 1] * dx + r[1, 1] * dy + r[2, 1] * dz
        lz = r[0, 2] * dx + r[1, 2] * dy + r[2, 2] * dz
        return lx, ly, lz

    def to_world(self, local: np.ndarray) -> np.ndarray:
        return local @ self.rotation.T + self.position

    def sdf(self, x, y, z):
        return sdf_local(self.node.kind, *self.to_local(x, y, z))

    def world_half_extents(self) -> np.ndarray:
        if isinstance(self.node.kind, Sphere):
            return np.full(3, self.node.kind.radius)
        return np.abs(self.rotation) @ local_half_extents(self.node.kind)


@dataclass(frozen=True)
class SceneBounds:
    lo: np.ndarray
    hi: np.ndarray
    center: np.ndarray
    radius: float

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius


def posed_parts(p: SceneProgram) -> list[PosedPart]:
    return [PosedPart.from_node(n) for n in p.parts]


def scene_bounds(p: SceneProgram) -> SceneBounds:
    """Axis-aligned box plus an enclosing sphere centred on the box centre."""
    if not p.parts:
        raise EmptyScene("program has no parts")
    parts = posed_parts(p)
    lo = np.min([pp.position - pp.world_half_extents() for pp in parts], axis=0)
    hi = np.max([pp.position + pp.world_half_extents() for pp in parts], axis=0)
    center = 0.5 * (lo + hi)
    radius = max(float(np.linalg.norm(pp.position - center)) + bounding_radius(pp.node.kind) for pp in parts)
    return SceneBounds(lo, hi, center, radius)


def scene_sdf(p: SceneProgram, points: np.ndarray) -> np.ndarray:
    """Union SDF of the whole program at world points of shape (n, 3)."""
    pts = np.asarray(points, dtype=float)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    best = np.full(len(pts), np.inf)
    for pp in posed_parts(p):
        best = np.minimum(best, pp.sdf(x, y, z))
    return best
