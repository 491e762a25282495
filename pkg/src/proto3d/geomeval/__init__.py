"""Geometric evaluation: registration, dense distances and the sparse part-arrangement metric."""

from .cloud_io import CloudFormatError, read_centroids, read_cloud, write_centroids, write_cloud
from .dense import DenseReport, dense_eval
from .distances import chamfer, euclidean, hausdorff, nn_distances
from .mapping import PartMapping, map_parts, normalize_label
from .registration import (
    DegenerateConfiguration,
    EmptyCloud,
    IcpResult,
    SimilarityTransform,
    SizeMismatch,
    icp,
    kabsch_umeyama,
)
from .sparse import (
    AllTargetsSkipped,
    InsufficientCorrespondences,
    SparseReport,
    TargetResult,
    evaluate_target,
    match_instances,
    nn_metric,
    sparse_eval,
)

__all__ = [
    "AllTargetsSkipped",
    "CloudFormatError",
    "DegenerateConfiguration",
    "DenseReport",
    "EmptyCloud",
    "IcpResult",
    "InsufficientCorrespondences",
    "PartMapping",
    "SimilarityTransform",
    "SizeMismatch",
    "SparseReport",
    "TargetResult",
    "chamfer",
    "dense_eval",
    "euclidean",
    "evaluate_target",
    "hausdorff",
    "icp",
    "kabsch_umeyama",
    "map_parts",
    "match_instances",
    "nn_distances",
    "nn_metric",
    "normalize_label",
    "read_centroids",
    "read_cloud",
    "sparse_eval",
    "write_centroids",
    "write_cloud",
]
