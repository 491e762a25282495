"""Closed-form similarity alignment (Kabsch-Umeyama) and point-to-point ICP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree


class DegenerateConfiguration(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


class EmptyCloud(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityTransform:
    """x -> scale * rotation @ x + translation."""

    scale: float = 1.0
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rms: float | None = None  # residual of the fit that produced this transform, if any

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9) or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with det +1")

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return self.scale * pts @ self.rotation.T + self.translation

    def __matmul__(self, other: SimilarityTransform) -> SimilarityTransform:
        """Composition: (self @ other).apply(x) == self.apply(other.apply(x))."""
        return SimilarityTransform(
            self.scale * other.scale,
            self.rotation @ other.rotation,
            self.scale * self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> SimilarityTransform:
        rt = self.rotation.T
        return SimilarityTransform(1.0 / self.scale, rt, -(rt @ self.translation) / self.scale)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.scale * self.rotation
        m[:3, 3] = self.translation
        return m

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
            "rms": self.rms,
        }


def kabsch_umeyama(src, dst, *, with_scale: bool = True) -> SimilarityTransform:
    """Least-squares (s, R, t) minimising sum ||dst_i - (s R src_i + t)||^2.

    SVD of the cross-covariance with the reflection correction; with
    ``with_scale=False`` the scale is pinned to 1 (plain Kabsch).
    """
    a = np.asarray(src, dtype=float).reshape(-1, 3)
    b = np.asarray(dst, dtype=float).reshape(-1, 3)
    if a.shape != b.shape:
        raise SizeMismatch(f"{len(a)} source points vs {len(b)} target points")
    if len(a) < 3:
        raise DegenerateConfiguration("need at least 3 correspondences")
    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    ac, bc = a - mu_a, b - mu_b
    cov = bc.T @ ac / len(a)
    u, sv, vt = np.linalg.svd(cov)
    if sv[0] <= 0 or sv[1] <= 1e-12 * sv[0]:
        raise DegenerateConfiguration("centred covariance has rank < 2 (points collinear or coincident)")
    s_fix = np.ones(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s_fix[2] = -1.0
    rot = (u * s_fix) @ vt
    if with_scale:
        var_a = np.mean(np.sum(ac * ac, axis=1))
        scale = float(np.dot(sv, s_fix) / var_a)
    else:
        scale = 1.0
    trans = mu_b - scale * rot @ mu_a
    resid = b - (scale * a @ rot.T + trans)
    rms = float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
    return SimilarityTransform(scale, rot, trans, rms)


@dataclass
class IcpResult:
    transform: SimilarityTransform  # rigid: scale is always 1
    rms: float
    iterations: int
    rms_history: list[float]  # rms before the first step, then after each accepted step
    converged: bool


def icp(src, dst, max_iters: int = 50, tol: float = 1e-7) -> IcpResult:
    """Rigid point-to-point ICP aligning ``src`` onto ``dst``.

    Each iteration pairs every current source point with its nearest target
    point, solves for the rigid motion in closed form and applies it. Stops
    when the RMS improves by less than ``tol`` or after ``max_iters``. A step
    that would raise the RMS is rejected, so the history is non-increasing.
    """
    a = _points(src)
    b = _points(dst)
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("ICP needs two non-empty clouds")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    tree = cKDTree(b)
    total = SimilarityTransform()
    cur = a.copy()
    dist, idx = tree.query(cur)
    rms = float(np.sqrt(np.mean(dist * dist)))
    history = [rms]
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        try:
            step = kabsch_umeyama(cur, b[idx], with_scale=False)
        except DegenerateConfiguration:
            converged = True
            break
        moved = step.apply(cur)
        new_dist, new_idx = tree.query(moved)
        new_rms = float(np.sqrt(np.mean(new_dist * new_dist)))
        if new_rms > rms:
            converged = True
            break
        improvement = rms - new_rms
        cur, idx, rms = moved, new_idx, new_rms
        total = step @ total
        history.append(rms)
        if improvement < tol:
            converged = True
            break
    total = SimilarityTransform(1.0, total.rotation, total.translation, rms)
    return IcpResult(total, rms, it, history, converged)


def _points(cloud) -> np.ndarray:
    pts = getattr(cloud, "points", cloud)
    return np.asarray(pts, dtype=float).reshape(-1, 3)
