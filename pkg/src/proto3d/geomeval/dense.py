"""Dense surface comparison: sample the prototype, register with ICP, measure distances."""

from __future__ import annotations

from dataclasses import dataclass

from ..render.sampling import PointCloud, sample_surface_points
from ..scene_lang import SceneProgram
from .distances import chamfer, hausdorff
from .registration import EmptyCloud, SimilarityTransform, _points, icp

DEFAULT_SAMPLES = 10_000


@dataclass
class DenseReport:
    chamfer: float
    hausdorff: float
    icp_iterations: int
    rms: float
    transform: SimilarityTransform

    def to_dict(self) -> dict:
        return {
            "chamfer": self.chamfer,
            "hausdorff": self.hausdorff,
            "icp_iterations": self.icp_iterations,
            "rms": self.rms,
            "transform": self.transform.to_dict(),
        }


def dense_eval(
    p: SceneProgram,
    target,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    *,
    max_iters: int = 50,
    tol: float = 1e-7,
    squared: bool = False,
) -> DenseReport:
    """Chamfer and Hausdorff distance between ``p``'s ICP-aligned surface samples and ``target``."""
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    tgt = _points(target)
    if len(tgt) == 0:
        raise EmptyCloud("target cloud is empty")
    samples = sample_surface_points(p, n_samples, seed)
    fit = icp(samples, tgt, max_iters=max_iters, tol=tol)
    aligned = PointCloud(fit.transform.apply(samples.points))
    return DenseReport(
        chamfer(aligned, tgt, squared=squared),
        hausdorff(aligned, tgt),
        fit.iterations,
        fit.rms,
        fit.transform,
    )
