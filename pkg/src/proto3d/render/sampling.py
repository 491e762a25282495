"""Area-uniform surface sampling and analytic part centroids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..scene_lang import Cone, Cuboid, Cylinder, SceneProgram, Sphere, Torus
from .geometry import EmptyScene, PosedPart, local_centroid, posed_parts, surface_area


@dataclass
class PointCloud:
    points: np.ndarray  # (n, 3)
    labels: np.ndarray | None = None  # (n,) int index into label_names
    label_names: tuple[str, ...] = ()

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite coordinates")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (len(self.points),):
                raise ValueError("labels must have one entry per point")
            if self.label_names and len(self.labels) and (
                self.labels.min() < 0 or self.labels.max() >= len(self.label_names)
            ):
                raise ValueError("label index out of range")
        self.label_names = tuple(self.label_names)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class LabeledCentroids:
    """(label, centroid) pairs.

    Labels coming from a program are unique; target corpora may repeat a
    semantic label once per instance (e.g. four ``leg`` entries).
    """

    entries: tuple[tuple[str, tuple[float, float, float]], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple((str(l), tuple(float(v) for v in c)) for l, c in self.entries)
        )

    @property
    def labels(self) -> list[str]:
        return [l for l, _ in self.entries]

    def array(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.entries)


def part_centroids(p: SceneProgram) -> LabeledCentroids:
    """Analytic volumetric centroid of every part, in world coordinates."""
    out = []
    for pp in posed_parts(p):
        c = pp.to_world(local_centroid(pp.node.kind)[None, :])[0]
        out.append((pp.node.label, tuple(c)))
    return LabeledCentroids(tuple(out))


def _disk(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    return r * np.cos(phi), r * np.sin(phi)


def _split(rng, n, areas):
    areas = np.asarray(areas, dtype=float)
    return rng.multinomial(n, areas / areas.sum())


def sample_local(kind, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` area-uniform points on the surface of ``kind`` in its local frame."""
    if n == 0:
        return np.zeros((0, 3))
    if isinstance(kind, Sphere):
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return kind.radius * v
    if isinstance(kind, Cuboid):
        a, b, c = kind.dims
        half = 0.5 * np.asarray(kind.dims)
        counts = _split(rng, n, [b * c, b * c, a * c, a * c, a * b, a * b])
        chunks = []
        for face, cnt in enumerate(counts):
            axis, sign = divmod(face, 2)
            pts = rng.uniform(-1.0, 1.0, (cnt, 3)) * half
            pts[:, axis] = half[axis] if sign == 0 else -half[axis]
            chunks.append(pts)
        return np.concatenate(chunks)
    if isinstance(kind, Cylinder):
        r, h = kind.radius, kind.height
        side, top, bottom = _split(rng, n, [2 * math.pi * r * h, math.pi * r * r, math.pi * r * r])
        phi = rng.uniform(0.0, 2.0 * math.pi, side)
        s = np.stack([r * np.cos(phi), r * np.sin(phi), rng.uniform(-0.5 * h, 0.5 * h, side)], axis=1)
        tx, ty = _disk(rng, top, r)
        bx, by = _disk(rng, bottom, r)
        t = np.stack([tx, ty, np.full(top, 0.5 * h)], axis=1)
        b = np.stack([bx, by, np.full(bottom, -0.5 * h)], axis=1)
        return np.concatenate([s, t, b])
    if isinstance(kind, Cone):
        r, h = kind.radius, kind.height
        lateral, base = _split(rng, n, [math.pi * r * math.hypot(r, h), math.pi * r * r])
        # lateral area density grows linearly with distance from the apex
        u = np.sqrt(rng.uniform(0.0, 1.0, lateral))
        phi = rng.uniform(0.0, 2.0 * math.pi, lateral)
        lat = np.stack([r * u * np.cos(phi), r * u * np.sin(phi), 0.5 * h - h * u], axis=1)
        bx, by = _disk(rng, base, r)
        bs = np.stack([bx, by, np.full(base, -0.5 * h)], axis=1)
        return np.concatenate([lat, bs])
    if isinstance(kind, Torus):
        big, small = kind.major_radius, kind.minor_radius
        us, vs = [], []
        need = n
        # rejection on the tube angle: area element is proportional to (R + r cos v)
        while need > 0:
            m = max(2 * need, 64)
            u = rng.uniform(0.0, 2.0 * math.pi, m)
            v = rng.uniform(0.0, 2.0 * math.pi, m)
            keep = rng.uniform(0.0, big + small, m) < big + small * np.cos(v)
            us.append(u[keep][:need])
            vs.append(v[keep][:need])
            need -= len(us[-1])
        u, v = np.concatenate(us), np.concatenate(vs)
        ring = big + small * np.cos(v)
        return np.stack([ring * np.cos(u), ring * np.sin(u), small * np.sin(v)], axis=1)
    raise TypeError(f"unknown primitive {kind!r}")


def sample_surface_points(p: SceneProgram, n: int, seed: int) -> PointCloud:
    """``n`` labeled points spread over all parts in proportion to surface area."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not p.parts:
        raise EmptyScene("program has no parts")
    rng = np.random.default_rng(seed)
    parts: list[PosedPart] = posed_parts(p)
    counts = _split(rng, n, [surface_area(pp.node.kind) for pp in parts])
    pts, labels = [], []
    for j, (pp, cnt) in enumerate(zip(parts, counts)):
        local = sample_local(pp.node.kind, int(cnt), rng)
        pts.append(pp.to_world(local))
        labels.append(np.full(int(cnt), j, dtype=np.int64))
    return PointCloud(np.concatenate(pts), np.concatenate(labels), tuple(p.labels))
