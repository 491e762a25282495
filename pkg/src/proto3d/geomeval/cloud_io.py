"""Reading and writing labelled point clouds and centroid target files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..render.sampling import LabeledCentroids, PointCloud


class CloudFormatError(ValueError):
    pass


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".labels.json")


def _read_sidecar(path: Path) -> tuple[str, ...] | None:
    side = sidecar_path(path)
    if not side.exists():
        return None
    try:
        names = json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CloudFormatError(f"{side}: {exc}") from exc
    if isinstance(names, dict):
        names = names.get("labels")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise CloudFormatError(f"{side}: expected a list of label names")
    return tuple(names)


def read_cloud(path: str | Path) -> PointCloud:
    """Load ``x y z [label]`` rows; ``.bin`` files hold little-endian float32 records.

    Binary records have 4 fields when a ``<stem>.labels.json`` sidecar exists
    and 3 otherwise. Text files may carry ``#`` comments.
    """
    path = Path(path)
    names = _read_sidecar(path)
    if path.suffix == ".bin":
        raw = np.fromfile(path, dtype="<f4")
        width = 4 if names is not None else 3
        if raw.size % width:
            raise CloudFormatError(f"{path}: {raw.size} values is not a multiple of {width}")
        data = raw.reshape(-1, width).astype(float)
    else:
        rows = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals = [float(v) for v in line.replace(",", " ").split()]
            except ValueError as exc:
                raise CloudFormatError(f"{path}:{lineno}: {exc}") from exc
            if len(vals) not in (3, 4) or (rows and len(vals) != len(rows[0])):
                raise CloudFormatError(f"{path}:{lineno}: expected a consistent 3 or 4 columns")
            rows.append(vals)
        data = np.array(rows, dtype=float).reshape(-1, len(rows[0]) if rows else 3)
    labels = None
    if data.shape[1] == 4:
        labels = data[:, 3]
        if not np.all(labels == np.round(labels)):
            raise CloudFormatError(f"{path}: label column must hold integers")
        labels = labels.astype(np.int64)
    try:
        return PointCloud(data[:, :3], labels, names or ())
    except ValueError as exc:
        raise CloudFormatError(f"{path}: {exc}") from exc


def write_cloud(path: str | Path, cloud: PointCloud) -> None:
    path = Path(path)
    labelled = cloud.labels is not None
    if path.suffix == ".bin":
        cols = [cloud.points] + ([cloud.labels[:, None].astype(float)] if labelled else [])
        np.hstack(cols).astype("<f4").tofile(path)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for i, pt in enumerate(cloud.points):
                row = " ".join(repr(float(v)) for v in pt)
                fh.write(row + (f" {int(cloud.labels[i])}" if labelled else "") + "\n")
    if labelled:
        sidecar_path(path).write_text(json.dumps(list(cloud.label_names)))


def read_centroids(path: str | Path) -> tuple[str, LabeledCentroids]:
    """A target file: ``{"id": ..., "parts": [{"label": ..., "centroid": [x, y, z]}, ...]}``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        parts = [(p["label"], p["centroid"]) for p in doc["parts"]]
        for _, c in parts:
            if len(c) != 3:
                raise ValueError("centroid must have 3 coordinates")
        return str(doc.get("id", path.stem)), LabeledCentroids(tuple(parts))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CloudFormatError(f"{path}: {exc}") from exc


def write_centroids(path: str | Path, target_id: str, c: LabeledCentroids) -> None:
    doc = {"id": target_id, "parts": [{"label": l, "centroid": list(p)} for l, p in c.entries]}
    Path(path).write_text(json.dumps(doc, indent=2))
