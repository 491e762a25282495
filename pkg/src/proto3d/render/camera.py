"""Pinhole cameras and the camera rigs used for inspection and dataset rendering."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..scene_lang import SceneProgram
from .geometry import scene_bounds

DEFAULT_RESOLUTION = (384, 384)
DEFAULT_FOV = math.radians(45.0)
DEFAULT_RADIUS_SCALE = 3.0


@dataclass(frozen=True)
class Camera:
    position: tuple[float, float, float]
    target: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)
    vertical_fov: float = DEFAULT_FOV
    resolution: tuple[int, int] = DEFAULT_RESOLUTION  # (width, height)

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        tgt = tuple(float(v) for v in self.target)
        up = np.asarray(self.up, dtype=float)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "target", tgt)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(tgt))):
            raise ValueError("camera position/target must be finite")
        if pos == tgt:
            raise ValueError("camera position equals target")
        if not 0.0 < self.vertical_fov < math.pi:
            raise ValueError(f"vertical_fov {self.vertical_fov} outside (0, pi)")
        w, h = self.resolution
        if w < 16 or h < 16:
            raise ValueError(f"resolution {self.resolution} below 16x16")
        object.__setattr__(self, "resolution", (int(w), int(h)))
        n = np.linalg.norm(up)
        if n == 0 or not np.isfinite(n):
            raise ValueError("up vector must be non-zero")
        object.__setattr__(self, "up", tuple(float(v) for v in up / n))

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward) frame."""
        fwd = np.subtract(self.target, self.position)
        fwd = fwd / np.linalg.norm(fwd)
        right = np.cross(fwd, self.up)
        if np.linalg.norm(right) < 1e-9:
            right = np.cross(fwd, _fallback_up(fwd))
        right = right / np.linalg.norm(right)
        up = np.cross(right, fwd)
        return right, up, fwd

    def ray_directions(self) -> np.ndarray:
        """Unit ray directions through pixel centres, shape (height, width, 3)."""
        w, h = self.resolution
        right, up, fwd = self.basis()
        half = math.tan(0.5 * self.vertical_fov)
        aspect = w / h
        u = (2.0 * (np.arange(w) + 0.5) / w - 1.0) * half * aspect
        v = (1.0 - 2.0 * (np.arange(h) + 0.5) / h) * half
        uu, vv = np.meshgrid(u, v)
        dx = fwd[0] + uu * right[0] + vv * up[0]
        dy = fwd[1] + uu * right[1] + vv * up[1]
        dz = fwd[2] + uu * right[2] + vv * up[2]
        n = np.sqrt(dx * dx + dy * dy + dz * dz)
        return np.stack([dx / n, dy / n, dz / n], axis=-1)

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "target": list(self.target),
            "up": list(self.up),
            "fov": self.vertical_fov,
            "resolution": list(self.resolution),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Camera:
        return cls(tuple(d["position"]), tuple(d["target"]), tuple(d["up"]), d["fov"], tuple(d["resolution"]))


def _fallback_up(fwd: np.ndarray) -> np.ndarray:
    return np.array([0.0, 1.0, 0.0]) if abs(fwd[1]) < 0.9 else np.array([1.0, 0.0, 0.0])


def look_at(position, target, fov=DEFAULT_FOV, resolution=DEFAULT_RESOLUTION) -> Camera:
    """Camera with z-up, falling back to another up axis when looking straight along z."""
    fwd = np.subtract(target, position)
    fwd = fwd / np.linalg.norm(fwd)
    up = np.array([0.0, 0.0, 1.0])
    if np.linalg.norm(np.cross(fwd, up)) < 1e-6:
        up = _fallback_up(fwd)
    return Camera(tuple(position), tuple(target), tuple(up), fov, resolution)


def icosphere_vertices(subdivision: int) -> np.ndarray:
    """Unit-sphere vertices of an icosahedron subdivided ``subdivision`` times (12, 42, 162, 642, ...)."""
    if subdivision < 0:
        raise ValueError("subdivision must be >= 0")
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vs = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivision):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = vs[i] + vs[j]
                vs.append(m / np.linalg.norm(m))
                cache[key] = len(vs) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(vs)


def fibonacci_sphere(count: int) -> np.ndarray:
    """``count`` near-uniform unit vectors on a golden-angle spiral."""
    if count < 1:
        raise ValueError("count must be >= 1")
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _rig(p: SceneProgram, directions: np.ndarray, radius_scale: float, fov, resolution) -> list[Camera]:
    if radius_scale <= 0:
        raise ValueError("radius_scale must be positive")
    b = scene_bounds(p)
    dist = radius_scale * b.radius
    center = tuple(float(c) for c in b.center)
    return [look_at(tuple(b.center + dist * d), center, fov, resolution) for d in directions]


def icosphere_cameras(
    p: SceneProgram,
    subdivision: int = 0,
    radius_scale: float = DEFAULT_RADIUS_SCALE,
    *,
    fov: float = DEFAULT_FOV,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
) -> list[Camera]:
    """One camera per icosphere vertex, all looking at the scene centre."""
    if not 0 <= subdivision <= 3:
        raise ValueError("subdivision must lie in [0, 3]")
    return _rig(p, icosphere_vertices(subdivision), radius_scale, fov, resolution)


def fibonacci_cameras(
    p: SceneProgram,
    count: int,
    radius_scale: float = DEFAULT_RADIUS_SCALE,
    *,
    fov: float = DEFAULT_FOV,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
) -> list[Camera]:
    """Arbitrary-count near-uniform full-sphere rig."""
    return _rig(p, fibonacci_sphere(count), radius_scale, fov, resolution)


def upper_hemisphere_directions(count: int, rng: np.random.Generator) -> np.ndarray:
    # uniform z on [0, 1] is area-uniform on the hemisphere (Archimedes)
    z = rng.uniform(0.0, 1.0, count)
    phi = rng.uniform(0.0, 2.0 * math.pi, count)
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def upper_hemisphere_cameras(
    p: SceneProgram,
    count: int,
    seed: int,
    radius_scale: float = DEFAULT_RADIUS_SCALE,
    *,
    fov: float = DEFAULT_FOV,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
) -> list[Camera]:
    """``count`` cameras drawn uniformly from the upper half of the camera sphere."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    return _rig(p, upper_hemisphere_directions(count, rng), radius_scale, fov, resolution)


def parse_rig(spec: str):
    """Parse a rig spec such as ``icosphere:1``, ``hemisphere:3`` or ``fibonacci:88``.

    Returns a callable ``(program, seed, resolution) -> list[Camera]``.
    """
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    try:
        n = int(arg) if arg else None
    except ValueError:
        raise ValueError(f"bad rig argument in {spec!r}") from None
    if name == "icosphere":
        sub = 0 if n is None else n
        return lambda p, seed, res: icosphere_cameras(p, sub, resolution=res)
    if name == "hemisphere":
        cnt = 3 if n is None else n
        return lambda p, seed, res: upper_hemisphere_cameras(p, cnt, seed, resolution=res)
    if name == "fibonacci":
        if n is None:
            raise ValueError("fibonacci rig needs a count, e.g. fibonacci:88")
        return lambda p, seed, res: fibonacci_cameras(p, n, resolution=res)
    raise ValueError(f"unknown rig {spec!r} (expected icosphere:N, hemisphere:N or fibonacci:N)")
