import math

import numpy as np
import pytest

from proto3d.geomeval import CloudFormatError, EmptyCloud, dense_eval, read_centroids, read_cloud, write_centroids, write_cloud
from proto3d.geomeval.cloud_io import sidecar_path
from proto3d.render import LabeledCentroids, PointCloud, sample_surface_points, scene_bounds

from helpers import rot_z


def test_self_consistency_two_seeds(chair):
    target = sample_surface_points(chair, 10_000, seed=1)
    rep = dense_eval(chair, target, n_samples=10_000, seed=2)
    diameter = scene_bounds(chair).diameter
    assert rep.chamfer < 0.01 * diameter
    assert rep.hausdorff >= rep.chamfer


def test_rigid_copy_is_recovered(chair):
    samples = sample_surface_points(chair, 10_000, seed=0)
    moved = samples.points @ rot_z(math.radians(4)).T + np.array([0.03, -0.02, 0.01])
    rep = dense_eval(chair, moved, n_samples=10_000, seed=0)
    assert rep.chamfer < 1e-3 * scene_bounds(chair).diameter
    assert rep.rms < 1e-6


def test_dense_errors(chair):
    with pytest.raises(EmptyCloud):
        dense_eval(chair, np.zeros((0, 3)))
    with pytest.raises(ValueError):
        dense_eval(chair, np.ones((5, 3)), n_samples=10)


def test_squared_flag(chair):
    target = sample_surface_points(chair, 500, seed=1)
    plain = dense_eval(chair, target, n_samples=500, seed=2)
    sq = dense_eval(chair, target, n_samples=500, seed=2, squared=True)
    assert sq.chamfer < plain.chamfer  # distances here are well below 1


@pytest.mark.parametrize("suffix", [".xyz", ".bin"])
def test_cloud_round_trip(tmp_path, suffix):
    rng = np.random.default_rng(0)
    pc = PointCloud(rng.normal(size=(50, 3)).astype(np.float32), rng.integers(0, 3, 50), ("leg", "seat", "back"))
    path = tmp_path / f"c{suffix}"
    write_cloud(path, pc)
    assert sidecar_path(path).exists()
    back = read_cloud(path)
    assert np.array_equal(back.points, pc.points)
    assert np.array_equal(back.labels, pc.labels)
    assert back.label_names == pc.label_names


def test_unlabelled_binary(tmp_path):
    pts = np.arange(12, dtype="<f4").reshape(4, 3)
    pts.tofile(tmp_path / "p.bin")
    pc = read_cloud(tmp_path / "p.bin")
    assert pc.labels is None and np.array_equal(pc.points, pts)


def test_text_cloud_comments_and_errors(tmp_path):
    p = tmp_path / "a.xyz"
    p.write_text("# header\n0 0 0\n1 2 3  # note\n")
    assert len(read_cloud(p)) == 2
    p.write_text("0 0 0\n1 2\n")
    with pytest.raises(CloudFormatError):
        read_cloud(p)
    p.write_text("0 0 x\n")
    with pytest.raises(CloudFormatError):
        read_cloud(p)
    (tmp_path / "b.bin").write_bytes(b"\x00" * 20)
    with pytest.raises(CloudFormatError):
        read_cloud(tmp_path / "b.bin")


def test_centroid_files(tmp_path):
    c = LabeledCentroids((("leg", (0, 0, 0)), ("leg", (1, 0, 0)), ("seat", (0.5, 0.5, 0.5))))
    write_centroids(tmp_path / "t.json", "chair_17", c)
    tid, back = read_centroids(tmp_path / "t.json")
    assert tid == "chair_17" and back == c
    (tmp_path / "bad.json").write_text('{"parts": [{"label": "x"}]}')
    with pytest.raises(CloudFormatError):
        read_centroids(tmp_path / "bad.json")
