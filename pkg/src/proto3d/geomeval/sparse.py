"""Part-arrangement metric: per-target centroid residuals after similarity alignment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..render.sampling import LabeledCentroids
from .distances import euclidean
from .mapping import PartMapping, map_parts
from .registration import DegenerateConfiguration, SimilarityTransform, kabsch_umeyama

NN_K = 5


class InsufficientCorrespondences(ValueError):
    pass


class AllTargetsSkipped(ValueError):
    pass


@dataclass
class TargetResult:
    target_id: str
    residual: float
    n_pairs: int
    transform: SimilarityTransform

    def to_dict(self) -> dict:
        return {
            "target_id": self.target_id,
            "residual": self.residual,
            "n_pairs": self.n_pairs,
            "transform": self.transform.to_dict(),
        }


@dataclass
class SparseReport:
    results: list[TargetResult]  # sorted by target id
    metric5nn: float
    skipped: dict[str, str] = field(default_factory=dict)  # target id -> reason
    mapped_fraction: float = 0.0  # mean share of prototype parts mapped, over evaluated targets

    @property
    def residuals(self) -> list[tuple[str, float]]:
        return [(r.target_id, r.residual) for r in self.results]

    def to_dict(self) -> dict:
        return {
            "metric5nn": self.metric5nn,
            "residuals": [r.to_dict() for r in self.results],
            "skipped": dict(self.skipped),
            "mapped_fraction": self.mapped_fraction,
        }


def nn_metric(residuals, k: int = NN_K) -> float:
    """Mean of the ``k`` smallest residuals (all of them when there are fewer)."""
    r = np.sort(np.asarray(residuals, dtype=float))
    if len(r) == 0:
        raise ValueError("no residuals")
    return float(np.mean(r[:k]))


def _provisional(src_groups: dict[str, np.ndarray], dst_groups: dict[str, np.ndarray]):
    """Rough similarity bringing prototype instances near their targets, for instance pairing.

    Uses the per-class mean centroids when at least three classes span a
    plane; otherwise matches overall means and RMS spread only.
    """
    classes = sorted(src_groups)
    a = np.array([src_groups[c].mean(axis=0) for c in classes])
    b = np.array([dst_groups[c].mean(axis=0) for c in classes])
    if len(classes) >= 3:
        try:
            return kabsch_umeyama(a, b)
        except DegenerateConfiguration:
            pass
    all_a = np.concatenate([src_groups[c] for c in classes])
    all_b = np.concatenate([dst_groups[c] for c in classes])
    ma, mb = all_a.mean(axis=0), all_b.mean(axis=0)
    sa = np.sqrt(np.mean(np.sum((all_a - ma) ** 2, axis=1)))
    sb = np.sqrt(np.mean(np.sum((all_b - mb) ** 2, axis=1)))
    s = sb / sa if sa > 0 and sb > 0 else 1.0
    return SimilarityTransform(s, np.eye(3), mb - s * ma)


def match_instances(proto: LabeledCentroids, target: LabeledCentroids, mapping: PartMapping):
    """Pair prototype centroids with target centroids of the mapped label.

    Repeated labels are paired greedily, closest pair first, after a
    provisional alignment. Returns (src points, dst points, pair labels).
    """
    src_groups: dict[str, list[tuple[str, np.ndarray]]] = {}
    for label, c in proto.entries:
        t = mapping.pairs.get(label)
        if t is not None:
            src_groups.setdefault(t, []).append((label, np.asarray(c)))
    dst_groups: dict[str, list[np.ndarray]] = {}
    for label, c in target.entries:
        if label in src_groups:
            dst_groups.setdefault(label, []).append(np.asarray(c))
    classes = sorted(c for c in src_groups if c in dst_groups)
    if not classes:
        return np.zeros((0, 3)), np.zeros((0, 3)), []
    guess = _provisional(
        {c: np.array([p for _, p in src_groups[c]]) for c in classes},
        {c: np.array(dst_groups[c]) for c in classes},
    )
    src, dst, names = [], [], []
    for c in classes:
        plabels = [l for l, _ in src_groups[c]]
        pts = np.array([p for _, p in src_groups[c]])
        tgt = np.array(dst_groups[c])
        moved = guess.apply(pts)
        d = np.linalg.norm(moved[:, None, :] - tgt[None, :, :], axis=2)
        order = np.argsort(d, axis=None, kind="stable")
        used_p, used_t = set(), set()
        for flat in order:
            i, j = divmod(int(flat), len(tgt))
            if i in used_p or j in used_t:
                continue
            used_p.add(i)
            used_t.add(j)
            src.append(pts[i])
            dst.append(tgt[j])
            names.append((plabels[i], c))
            if len(used_p) == len(pts) or len(used_t) == len(tgt):
                break
    return np.array(src), np.array(dst), names


def evaluate_target(proto: LabeledCentroids, target: LabeledCentroids, mapping: PartMapping, target_id: str = "") -> TargetResult:
    src, dst, _ = match_instances(proto, target, mapping)
    if len(src) < 3:
        raise InsufficientCorrespondences(f"target {target_id!r}: {len(src)} matched parts, need 3")
    try:
        tf = kabsch_umeyama(src, dst)
    except DegenerateConfiguration as exc:
        raise InsufficientCorrespondences(f"target {target_id!r}: {exc}") from exc
    residual = float(np.mean(euclidean(tf.apply(src), dst)))
    return TargetResult(target_id, residual, len(src), tf)


def sparse_eval(proto: LabeledCentroids, targets, backend=None, *, k: int = NN_K, query: str = "") -> SparseReport:
    """Align the prototype's part centroids to every target and aggregate the ``k`` best residuals."""
    targets = list(targets)
    if not targets:
        raise ValueError("need at least one target")
    results: list[TargetResult] = []
    skipped: dict[str, str] = {}
    fractions = []
    for target_id, target in sorted(targets, key=lambda t: str(t[0])):
        target_id = str(target_id)
        mapping = map_parts(proto.labels, target.labels, backend, query=query)
        try:
            results.append(evaluate_target(proto, target, mapping, target_id))
        except InsufficientCorrespondences as exc:
            skipped[target_id] = str(exc)
            continue
        fractions.append(len(mapping.pairs) / len(proto))
    if not results:
        raise AllTargetsSkipped(f"all {len(targets)} targets were skipped")
    return SparseReport(
        results,
        nn_metric([r.residual for r in results], k),
        skipped,
        float(np.mean(fractions)),
    )
