"""Sphere-tracing renderer producing shaded, albedo, depth and part-mask images."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..scene_lang import SceneProgram, validate
from .camera import Camera, upper_hemisphere_directions
from .geometry import EmptyScene, PosedPart, posed_parts, scene_bounds

MODES = ("shaded", "albedo", "depth", "mask")
MAX_STEPS = 256
EPSILON_SCALE = 1e-4
MAX_DISTANCE_SCALE = 8.0
TILE_ROWS = 32
BACKGROUND_RGB = (1.0, 1.0, 1.0)


class InvalidProgram(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class DirectionalLight:
    direction: tuple[float, float, float]  # unit vector pointing towards the light
    intensity: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        n = np.linalg.norm(d)
        if not n > 0:
            raise ValueError("light direction must be non-zero")
        object.__setattr__(self, "direction", tuple(float(v) for v in d / n))
        if not self.intensity >= 0:
            raise ValueError("light intensity must be >= 0")


@dataclass(frozen=True)
class LightRig:
    lights: tuple[DirectionalLight, ...] = ()
    ambient: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "lights", tuple(self.lights))
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError("ambient must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "ambient": self.ambient,
            "lights": [{"direction": list(l.direction), "intensity": l.intensity} for l in self.lights],
        }


def random_light_rig(seed: int, count: int = 2, ambient: float = 0.15) -> LightRig:
    """Seeded random lighting: directions on the upper hemisphere, intensities in [0.6, 1.0]."""
    rng = np.random.default_rng(seed)
    dirs = upper_hemisphere_directions(count, rng)
    intensities = rng.uniform(0.6, 1.0, count)
    return LightRig(tuple(DirectionalLight(tuple(d), float(i)) for d, i in zip(dirs, intensities)), ambient)


@dataclass
class HitBuffer:
    """Per-pixel results of primary-ray tracing."""

    depth: np.ndarray  # (h, w) float64 ray distance, inf = background
    part: np.ndarray  # (h, w) int32 0-based part index, -1 = background
    normal: np.ndarray  # (h, w, 3) float64 unit outward normals, 0 on background
    epsilon: float
    labels: tuple[str, ...] = ()

    @property
    def hit(self) -> np.ndarray:
        return self.part >= 0


def _trace_rays(parts: list[PosedPart], origin, dirs, center, radius, eps):
    """Trace a flat batch of rays. Returns (t, part_index)."""
    n = len(dirs)
    t_out = np.full(n, np.inf)
    part_out = np.full(n, -1, dtype=np.int32)
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    # entry/exit of the scene bounding sphere
    ox, oy, oz = origin[0] - center[0], origin[1] - center[1], origin[2] - center[2]
    b = ox * dx + oy * dy + oz * dz
    c = ox * ox + oy * oy + oz * oz - radius * radius
    disc = b * b - c
    idx = np.nonzero(disc >= 0.0)[0]
    sq = np.sqrt(disc[idx])
    t = np.maximum(-b[idx] - sq, 0.0)
    t_exit = np.minimum(-b[idx] + sq, t + MAX_DISTANCE_SCALE * radius)
    keep = t_exit > t
    idx, t, t_exit = idx[keep], t[keep], t_exit[keep]
    for _ in range(MAX_STEPS):
        if idx.size == 0:
            break
        px = origin[0] + t * dx[idx]
        py = origin[1] + t * dy[idx]
        pz = origin[2] + t * dz[idx]
        best = np.full(idx.size, np.inf)
        arg = np.full(idx.size, -1, dtype=np.int32)
        for j, pp in enumerate(parts):
            d = pp.sdf(px, py, pz)
            closer = d < best
            best = np.where(closer, d, best)
            arg = np.where(closer, j, arg)
        hit = best < eps
        if hit.any():
            t_out[idx[hit]] = t[hit]
            part_out[idx[hit]] = arg[hit]
        t = t + best
        alive = ~hit & (t <= t_exit)
        idx, t, t_exit = idx[alive], t[alive], t_exit[alive]
    return t_out, part_out


def _normals(parts: list[PosedPart], points: np.ndarray, part_idx: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(points)
    for j, pp in enumerate(parts):
        sel = np.nonzero(part_idx == j)[0]
        if sel.size == 0:
            continue
        x, y, z = points[sel, 0], points[sel, 1], points[sel, 2]
        gx = pp.sdf(x + h, y, z) - pp.sdf(x - h, y, z)
        gy = pp.sdf(x, y + h, z) - pp.sdf(x, y - h, z)
        gz = pp.sdf(x, y, z + h) - pp.sdf(x, y, z - h)
        n = np.sqrt(gx * gx + gy * gy + gz * gz)
        n = np.where(n > 0.0, n, 1.0)
        out[sel, 0], out[sel, 1], out[sel, 2] = gx / n, gy / n, gz / n
    return out


def _check(p: SceneProgram) -> None:
    if not p.parts:
        raise EmptyScene("program has no parts")
    diags = validate(p)
    if diags:
        raise InvalidProgram(diags)


def trace(p: SceneProgram, cam: Camera, *, jobs: int = 1) -> HitBuffer:
    """Sphere-trace one primary ray per pixel against the union SDF of ``p``.

    Work is split into row tiles; every pixel reads only immutable scene data,
    so the output is identical for any ``jobs``.
    """
    _check(p)
    parts = posed_parts(p)
    bounds = scene_bounds(p)
    eps = EPSILON_SCALE * bounds.radius
    w, h = cam.resolution
    dirs = cam.ray_directions()
    origin = np.asarray(cam.position, dtype=float)

    depth = np.full((h, w), np.inf)
    part = np.full((h, w), -1, dtype=np.int32)
    normal = np.zeros((h, w, 3))

    def work(r0: int) -> None:
        r1 = min(r0 + TILE_ROWS, h)
        d = dirs[r0:r1].reshape(-1, 3)
        t, pi = _trace_rays(parts, origin, d, bounds.center, bounds.radius, eps)
        hit = pi >= 0
        pts = origin + t[hit, None] * d[hit]
        nrm = np.zeros_like(d)
        nrm[hit] = _normals(parts, pts, pi[hit], eps)
        depth[r0:r1] = t.reshape(r1 - r0, w)
        part[r0:r1] = pi.reshape(r1 - r0, w)
        normal[r0:r1] = nrm.reshape(r1 - r0, w, 3)

    starts = range(0, h, TILE_ROWS)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, starts))
    else:
        for r0 in starts:
            work(r0)
    return HitBuffer(depth, part, normal, eps, tuple(p.labels))


def shade(p: SceneProgram, hits: HitBuffer, mode: str, lights: LightRig | None = None) -> np.ndarray:
    """Turn a hit buffer into an image for ``mode``.

    shaded/albedo -> float64 (h, w, 3) in [0, 1]; depth -> float64 (h, w), inf on
    background; mask -> uint8 (h, w), 1-based part index, 0 on background.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    hit = hits.hit
    if mode == "depth":
        return hits.depth.copy()
    if mode == "mask":
        if len(p.parts) > 255:
            raise ValueError("mask images hold at most 255 parts")
        return np.where(hit, hits.part + 1, 0).astype(np.uint8)
    albedo_table = np.array([part.material.albedo for part in p.parts], dtype=float)
    img = np.empty(hits.part.shape + (3,))
    img[...] = BACKGROUND_RGB
    alb = albedo_table[hits.part[hit]]
    if mode == "albedo":
        img[hit] = alb
        return img
    rig = lights if lights is not None else LightRig()
    n = hits.normal[hit]
    light = np.full(len(n), rig.ambient)
    for l in rig.lights:
        ldir = l.direction
        lam = n[:, 0] * ldir[0] + n[:, 1] * ldir[1] + n[:, 2] * ldir[2]
        light = light + l.intensity * np.maximum(lam, 0.0)
    img[hit] = np.clip(alb * light[:, None], 0.0, 1.0)
    return img


def render(
    p: SceneProgram,
    cam: Camera,
    lights: LightRig | None = None,
    mode: str = "shaded",
    *,
    jobs: int = 1,
) -> np.ndarray:
    """Render ``p`` from ``cam`` in one of the modes shaded, albedo, depth or mask."""
    return shade(p, trace(p, cam, jobs=jobs), mode, lights)


@dataclass
class RenderedView:
    camera: Camera
    mode: str
    pixels: np.ndarray


@dataclass
class RenderSet:
    """All images rendered for one refinement iteration."""

    iteration: int
    views: list[RenderedView] = field(default_factory=list)
    lights: LightRig | None = None

    def by_mode(self, mode: str) -> list[RenderedView]:
        return [v for v in self.views if v.mode == mode]


def render_views(
    p: SceneProgram,
    cameras: list[Camera],
    lights: LightRig | None,
    modes=("shaded",),
    *,
    iteration: int = 0,
    jobs: int = 1,
) -> RenderSet:
    """Trace each camera once and derive every requested mode from the same hits."""
    rs = RenderSet(iteration, [], lights)
    for cam in cameras:
        hits = trace(p, cam, jobs=jobs)
        for mode in modes:
            rs.views.append(RenderedView(cam, mode, shade(p, hits, mode, lights)))
    return rs


def image_digest(pixels: np.ndarray) -> str:
    arr = np.ascontiguousarray(pixels)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode() + str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()

