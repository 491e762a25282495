import math
import random

import pytest
from hypothesis import given, settings

from proto3d.scene_lang import (
    Arrangement,
    ArrangementEntry,
    Cuboid,
    DuplicateLabel,
    InvalidArrangement,
    NonFiniteValue,
    NonPositiveDimension,
    PartNode,
    Pose,
    SceneProgram,
    SceneSyntaxError,
    Sphere,
    arrangement_to_program,
    normalize_angle,
    parse_program,
    serialize_program,
    validate,
)

from helpers import CHAIR_LAYOUT, make_chair
from strategies import mutate, programs, random_program

SEAT = 'part "Seat" { cuboid dims [0.6,0.6,0.1] pos [0.3,0.3,0.5] rot [0,0,0] }'


def test_seat_example():
    p = parse_program(SEAT)
    assert p.labels == ["Seat"]
    seat = p.part("Seat")
    assert seat.kind == Cuboid((0.6, 0.6, 0.1))
    assert seat.pose.position == (0.3, 0.3, 0.5)
    assert seat.pose.rotation == (0.0, 0.0, 0.0)
    assert p.canvas is None


def test_empty_text_is_error_at_line_1():
    with pytest.raises(SceneSyntaxError) as info:
        parse_program("")
    assert info.value.line == 1


def test_duplicate_label():
    text = SEAT.replace("Seat", "Leg1") + "\n" + SEAT.replace("Seat", "Leg1")
    with pytest.raises(DuplicateLabel) as info:
        parse_program(text)
    assert info.value.line == 2


def test_error_positions():
    text = 'part "A" {\n  sphere 1\n  pos [0, 0 0]\n  rot [0,0,0] }'
    with pytest.raises(SceneSyntaxError) as info:
        parse_program(text)
    assert (info.value.line, info.value.column) == (3, 13)
    assert info.value.expected == "','"


def test_non_positive_dimension_in_source():
    with pytest.raises(NonPositiveDimension):
        parse_program(SEAT.replace("[0.6,0.6,0.1]", "[0,0.6,0.1]"))
    with pytest.raises(NonPositiveDimension):
        parse_program('part "s" { sphere -1 pos [0,0,0] rot [0,0,0] }')


def test_overflowing_number_is_positioned():
    with pytest.raises(NonFiniteValue):
        parse_program('part "s" { sphere 1e999 pos [0,0,0] rot [0,0,0] }')


def test_comments_canvas_and_rgb():
    text = """
    # a lamp
    canvas [0.3, 0.3, 1.5]
    part "Shade" { cone 0.2 0.3 pos [0, 0, 1.3] rot [0, 0, 0] rgb [1, 0.9, 0.2] }  # top
    part "Ring" { torus 0.1 0.02 pos [0, 0, 0.1] rot [1.5707963267948966, 0, 0] }
    """
    p = parse_program(text)
    assert p.canvas == (0.3, 0.3, 1.5)
    assert p.part("Shade").material.albedo == (1.0, 0.9, 0.2)
    assert p.part("Ring").pose.rotation[0] == math.pi / 2


def test_escaped_label_round_trips():
    p = SceneProgram((PartNode('say "hi" \\ there', Sphere(1.0)),))
    assert parse_program(serialize_program(p)) == p


def test_sphere_round_trip():
    p = SceneProgram((PartNode("Ball", Sphere(0.25), Pose((1, 2, 3), (0.1, 0.2, 0.3))),))
    assert parse_program(serialize_program(p)) == p


def test_chair_round_trip(chair):
    assert len(chair.parts) == 6
    assert parse_program(serialize_program(chair)) == chair


def test_rotation_three_pi_becomes_pi():
    p = SceneProgram((PartNode("a", Sphere(1.0), Pose((0, 0, 0), (3 * math.pi, 0, 0))),))
    assert p.parts[0].pose.rotation[0] == math.pi
    assert "rot [3.141592653589793, 0.0, 0.0]" in serialize_program(p)


@pytest.mark.parametrize(
    "a, expected",
    [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (2 * math.pi, 0.0), (-3 * math.pi / 2, math.pi / 2)],
)
def test_normalize_angle(a, expected):
    assert normalize_angle(a) == pytest.approx(expected, abs=1e-15)


def test_validate_chair_is_clean(chair):
    assert validate(chair) == []


def test_validate_zero_dim():
    p = SceneProgram((PartNode("Seat", Cuboid((0, 1, 1))),))
    (d,) = validate(p)
    assert (d.code, d.part, d.field) == ("NonPositiveDimension", "Seat", "dims.x")


def test_validate_nan_position():
    p = SceneProgram((PartNode("Seat", Cuboid((1, 1, 1)), Pose((float("nan"), 0, 0))),))
    (d,) = validate(p)
    assert (d.code, d.part, d.field) == ("NonFinite", "Seat", "pos.x")


def test_validate_empty_and_duplicates():
    assert [d.code for d in validate(SceneProgram(()))] == ["EmptyProgram"]
    dup = SceneProgram((PartNode("a", Sphere(1)), PartNode("a", Sphere(2))))
    assert [d.code for d in validate(dup)] == ["DuplicateLabel"]


def test_arrangement_seat_example():
    a = Arrangement((ArrangementEntry("Seat", (0.6, 0.6, 0.1), (0.3, 0.3, 0.5)),))
    p = arrangement_to_program(a)
    seat = p.part("Seat")
    assert seat.kind == Cuboid((0.6, 0.6, 0.1))
    assert seat.pose.position == (0.3, 0.3, 0.5)


def test_arrangement_empty_and_rotated():
    p = arrangement_to_program(Arrangement(()))
    assert p.parts == ()
    assert validate(p)
    r = arrangement_to_program(Arrangement((ArrangementEntry("Arm", (1, 1, 1), (0, 0, 0), (math.pi / 2, 0, 0)),)))
    assert r.part("Arm").pose.rotation == (math.pi / 2, 0.0, 0.0)


def test_arrangement_rejects_bad_dims():
    with pytest.raises(InvalidArrangement):
        arrangement_to_program(Arrangement((ArrangementEntry("x", (0, 1, 1), (0, 0, 0)),)))


def test_arrangement_preserves_chair(chair):
    a = Arrangement(tuple(ArrangementEntry(k, d, p) for k, (d, p) in CHAIR_LAYOUT.items()))
    assert arrangement_to_program(a) == make_chair()


@given(programs())
@settings(max_examples=300)
def test_round_trip_property(p):
    assert parse_program(serialize_program(p)) == p


@given(programs())
@settings(max_examples=100)
def test_serialization_is_canonical(p):
    text = serialize_program(p)
    assert serialize_program(parse_program(text)) == text


def test_fuzz_only_positioned_errors():
    rng = random.Random(1234)
    seeds = [serialize_program(random_program(rng)) for _ in range(20)] + [SEAT]
    rejected = 0
    for _ in range(2000):
        text = mutate(rng.choice(seeds), rng)
        try:
            parse_program(text)
        except SceneSyntaxError as exc:
            assert exc.line >= 1 and exc.column >= 1
            rejected += 1
    assert rejected > 500
