import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proto3d.render import EmptyScene, part_centroids, sample_surface_points, scene_sdf
from proto3d.render.geometry import sdf_local, surface_area
from proto3d.scene_lang import Cone, Cuboid, PartNode, Pose, SceneProgram, Sphere, Torus

from helpers import KINDS, posed_all_kinds, textbook_area

@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.kind)
def test_area_against_shell_volume(kind):
    # area ~ volume of the thin shell |sdf| < delta divided by its thickness
    rng = np.random.default_rng(0)
    half = 0.7
    n, delta = 2_000_000, 0.01
    pts = rng.uniform(-half, half, (n, 3))
    inside = np.abs(sdf_local(kind, pts[:, 0], pts[:, 1], pts[:, 2])) < delta
    shell = inside.mean() * (2 * half) ** 3
    assert shell / (2 * delta) == pytest.approx(surface_area(kind), rel=0.04)
    assert surface_area(kind) == pytest.approx(textbook_area(kind), rel=1e-12)


def test_unit_sphere_samples():
    p = SceneProgram((PartNode("s", Sphere(1.0)),))
    pc = sample_surface_points(p, 5000, seed=0)
    assert len(pc) == 5000
    assert np.max(np.abs(np.linalg.norm(pc.points, axis=1) - 1.0)) <= 1e-9


def test_two_sphere_ratio():
    p = SceneProgram((PartNode("a", Sphere(1.0), Pose((-5, 0, 0))), PartNode("b", Sphere(2.0), Pose((5, 0, 0)))))
    n = 100_000
    pc = sample_surface_points(p, n, seed=1)
    frac_a = np.mean(pc.labels == 0)
    assert abs(frac_a - 1 / 5) <= 0.02


def test_torus_distance_from_axis_circle():
    p = SceneProgram((PartNode("t", Torus(2.0, 0.5)),))
    pts = sample_surface_points(p, 20_000, seed=2).points
    d = np.hypot(np.hypot(pts[:, 0], pts[:, 1]) - 2.0, pts[:, 2])
    assert np.max(np.abs(d - 0.5)) <= 1e-9


def test_area_fractions_and_sdf_at_100k():
    p = posed_all_kinds()
    n = 100_000
    pc = sample_surface_points(p, n, seed=3)
    areas = np.array([textbook_area(k) for k in KINDS])
    frac = np.bincount(pc.labels, minlength=len(KINDS)) / n
    assert np.max(np.abs(frac - areas / areas.sum())) <= 0.02
    assert np.max(np.abs(scene_sdf(p, pc.points))) <= 1e-9


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.kind)
def test_within_part_uniformity(kind):
    # compare the sample centroid with a shell-volume Monte Carlo centroid of the surface
    p = SceneProgram((PartNode("x", kind),))
    pts = sample_surface_points(p, 200_000, seed=4).points
    rng = np.random.default_rng(5)
    q = rng.uniform(-0.7, 0.7, (3_000_000, 3))
    shell = q[np.abs(sdf_local(kind, q[:, 0], q[:, 1], q[:, 2])) < 0.005]
    assert np.allclose(pts.mean(0), shell.mean(0), atol=0.01)


def test_sampling_deterministic(chair):
    a = sample_surface_points(chair, 1000, seed=9)
    b = sample_surface_points(chair, 1000, seed=9)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.labels, b.labels)
    assert a.label_names == tuple(chair.labels)


def test_sampling_errors():
    with pytest.raises(EmptyScene):
        sample_surface_points(SceneProgram(()), 10, 0)
    with pytest.raises(ValueError):
        sample_surface_points(SceneProgram((PartNode("s", Sphere(1.0)),)), 0, 0)


def test_cuboid_centroid_is_position():
    p = SceneProgram((PartNode("Seat", Cuboid((0.6, 0.6, 0.1)), Pose((0.3, 0.3, 0.5))),))
    assert part_centroids(p).entries == (("Seat", (0.3, 0.3, 0.5)),)


@given(st.tuples(*[st.floats(-math.pi, math.pi)] * 3))
@settings(max_examples=50)
def test_sphere_centroid_ignores_rotation(rot):
    p = SceneProgram((PartNode("s", Sphere(0.5), Pose((1, 2, 3), rot)),))
    assert np.allclose(part_centroids(p).array()[0], (1, 2, 3), atol=1e-12)


def test_cone_centroid_monte_carlo():
    cone = Cone(0.5, 1.0)
    rng = np.random.default_rng(6)
    q = rng.uniform(-0.5, 0.5, (2_000_000, 3))
    inside = q[sdf_local(cone, q[:, 0], q[:, 1], q[:, 2]) < 0]
    assert inside[:, 2].mean() == pytest.approx(-0.25, abs=2e-3)
    c = part_centroids(SceneProgram((PartNode("c", cone),))).array()[0]
    assert np.allclose(c, (0, 0, -0.25), atol=1e-15)


def test_cone_centroid_is_posed():
    p = SceneProgram((PartNode("c", Cone(0.5, 1.0), Pose((1, 0, 0), (math.pi / 2, 0, 0))),))
    # rotating +90 degrees about x maps local -z to +y
    assert np.allclose(part_centroids(p).array()[0], (1, 0.25, 0), atol=1e-12)
