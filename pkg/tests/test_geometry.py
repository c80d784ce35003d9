import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rigid
from footreg.errors import DegenerateAngle, DegenerateChord, InvalidRing, NearParallel
from footreg.geometry import (
    Line,
    Orientation,
    Point,
    Polyline,
    Ring,
    Turn,
    distance_to_boundary,
    is_simple,
    line_intersection,
    perpendicular_distance,
    project_point,
    signed_area,
    triangle_area,
    turn_sign,
    vertex_angle,
)

coord = st.floats(-1e3, 1e3, allow_nan=False)
point = st.tuples(coord, coord)


def test_perpendicular_distance_narrated_geometry():
    assert perpendicular_distance((0, 1.8), (0, 0), (10, 0)) == pytest.approx(1.8, abs=1e-12)


def test_perpendicular_distance_on_chord_is_zero():
    assert perpendicular_distance((3, 0), (0, 0), (10, 0)) == 0.0


def test_perpendicular_distance_rotated_37_degrees():
    p, a, b = rigid([(1, 1), (0, 0), (2, 0)], 37.0, 0.0, 0.0)
    assert perpendicular_distance(p, a, b) == pytest.approx(1.0, abs=1e-12)


def test_perpendicular_distance_degenerate_chord():
    with pytest.raises(DegenerateChord):
        perpendicular_distance((1, 1), (2, 2), (2, 2))


def test_signed_area_examples(unit_square):
    assert signed_area(unit_square) == pytest.approx(1.0)
    assert signed_area(unit_square.reversed()) == pytest.approx(-1.0)
    assert signed_area(Ring([(0, 0), (4, 0), (0, 3)])) == pytest.approx(6.0)


def test_ring_orientation_matches_shoelace(unit_square):
    assert unit_square.orientation is Orientation.CCW
    assert unit_square.reversed().orientation is Orientation.CW
    assert unit_square.oriented(Orientation.CCW) is unit_square


@pytest.mark.parametrize(
    "vertices",
    [
        [(0, 0), (1, 0)],
        [(0, 0), (1, 0), (2, 0)],
        [(0, 0), (1, 0), (1, 0), (0, 1)],
        [(0, 0), (1, 0), (0, 1), (0, 0)],
        [(0, 0), (1, float("nan")), (0, 1)],
    ],
)
def test_ring_rejects_invalid(vertices):
    with pytest.raises(InvalidRing):
        Ring(vertices)


def test_polyline_rejects_consecutive_duplicates():
    with pytest.raises(ValueError):
        Polyline([(0, 0), (0, 0), (1, 1)])


def test_vertex_angle_examples():
    assert vertex_angle((1, 0), (0, 0), (0, 1)) == pytest.approx(90.0)
    expected = math.degrees(math.atan2(0.01, -1.0))
    assert vertex_angle((1, 0), (0, 0), (-1, 0.01)) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(179.4, abs=0.05)
    c, s = math.cos(math.radians(15)), math.sin(math.radians(15))
    assert vertex_angle((1, 0), (0, 0), (c, s)) == pytest.approx(15.0, abs=1e-9)
    # The narrated four-decimal point is 15 degrees to the same precision.
    assert vertex_angle((1, 0), (0, 0), (0.9659, 0.2588)) == pytest.approx(15.0, abs=1e-2)


def test_vertex_angle_degenerate():
    with pytest.raises(DegenerateAngle):
        vertex_angle((0, 0), (0, 0), (1, 1))


def test_triangle_area_examples():
    assert triangle_area((0, 0), (1, 0), (2, 0)) == 0.0
    assert triangle_area((0, 0), (1, 0), (0, 1)) == 0.5


@given(point, point, point)
def test_triangle_area_cross_product_oracle(p1, p2, p3):
    u = np.subtract(p2, p1)
    v = np.subtract(p3, p1)
    oracle = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
    assert triangle_area(p1, p2, p3) == pytest.approx(oracle, rel=1e-12, abs=1e-12)


def test_turn_sign_examples():
    assert turn_sign((0, 0), (1, 0), (1, 1)) is Turn.LEFT
    assert turn_sign((0, 0), (1, 0), (1, -1)) is Turn.RIGHT
    assert turn_sign((0, 0), (1, 0), (2, 0)) is Turn.STRAIGHT


@given(point, point, point)
def test_turn_sign_flips_under_mirror(a, b, c):
    mirror = [(x, -y) for x, y in (a, b, c)]
    flipped = {Turn.LEFT: Turn.RIGHT, Turn.RIGHT: Turn.LEFT, Turn.STRAIGHT: Turn.STRAIGHT}
    assert turn_sign(*mirror) is flipped[turn_sign(a, b, c)]


@given(
    st.lists(point, min_size=3, max_size=3, unique=True),
    st.floats(0, 360),
    coord,
    coord,
)
def test_predicates_rigid_motion_invariant(pts, degrees, tx, ty):
    a, b, c = pts
    moved = rigid(pts, degrees, tx, ty)
    if math.dist(b, c) > 1e-6:
        assert perpendicular_distance(moved[0], moved[1], moved[2]) == pytest.approx(
            perpendicular_distance(a, b, c), abs=1e-9 * max(1.0, abs(tx) + abs(ty) + 1e3)
        )
    if math.dist(a, b) > 1e-3 and math.dist(c, b) > 1e-3:
        assert vertex_angle(*moved) == pytest.approx(vertex_angle(a, b, c), abs=1e-6)
    scale = max(1.0, max(abs(v) for p in pts for v in p) + abs(tx) + abs(ty))
    assert triangle_area(*moved) == pytest.approx(triangle_area(a, b, c), abs=1e-9 * scale * scale)


def test_project_point_examples():
    x0 = Line.from_coefficients(1, 0, 0)
    assert project_point(x0, (3, 7)) == Point(0, 7)
    line = Line.through((0, 1), (4, 3))
    p = project_point(line, (1, 1.5))
    assert project_point(line, p) == pytest.approx(p, abs=1e-12)


@given(st.floats(0, 180), st.floats(-50, 50), point)
def test_project_point_matches_parameter_scan(angle, offset, p):
    t = math.radians(angle)
    line = Line.from_coefficients(-math.sin(t), math.cos(t), offset)
    foot = project_point(line, p)
    assert abs(line.evaluate(foot)) < 1e-9
    assert project_point(line, foot) == pytest.approx(foot, abs=1e-9)
    # Oracle: 1-D search along the line for the zero of the derivative of
    # the squared distance, (q(s) - p) . d, by bisection.
    d = np.array(line.direction)
    q0 = -line.c * np.array([line.a, line.b])
    lo, hi = -1e4, 1e4
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.dot(q0 + mid * d - np.asarray(p), d) < 0:
            lo = mid
        else:
            hi = mid
    best = q0 + 0.5 * (lo + hi) * d
    assert foot == pytest.approx(tuple(best), abs=1e-6)


def test_line_intersection_examples():
    x_eq_0 = Line.from_coefficients(1, 0, 0)
    y_eq_0 = Line.from_coefficients(0, 1, 0)
    assert line_intersection(x_eq_0, y_eq_0) == pytest.approx((0, 0))
    assert line_intersection(Line.from_coefficients(1, 0, -2), Line.from_coefficients(0, 1, -3)) == pytest.approx(
        (2, 3)
    )


@given(st.floats(0, 180), st.floats(0, 180), coord, coord)
def test_line_intersection_lies_on_both(t1, t2, c1, c2):
    l1 = Line.from_coefficients(-math.sin(math.radians(t1)), math.cos(math.radians(t1)), c1)
    l2 = Line.from_coefficients(-math.sin(math.radians(t2)), math.cos(math.radians(t2)), c2)
    if abs(l1.a * l2.b - l2.a * l1.b) < math.sin(math.radians(1.0)):
        with pytest.raises(NearParallel):
            line_intersection(l1, l2)
        return
    x = line_intersection(l1, l2)
    scale = max(1.0, abs(x.x), abs(x.y))
    assert abs(l1.evaluate(x)) < 1e-9 * scale
    assert abs(l2.evaluate(x)) < 1e-9 * scale


def test_line_intersection_near_parallel():
    l1 = Line.from_coefficients(0, 1, 0)
    t = math.radians(0.5)
    l2 = Line.from_coefficients(-math.sin(t), math.cos(t), -1)
    with pytest.raises(NearParallel):
        line_intersection(l1, l2)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_line_canonical_form(a, b, c):
    if math.hypot(a, b) < 1e-6:
        return
    l1 = Line.from_coefficients(a, b, c)
    l2 = Line.from_coefficients(-2 * a, -2 * b, -2 * c)
    assert abs(l1.a * l1.a + l1.b * l1.b - 1.0) < 1e-12
    assert l1.a > 0 or (l1.a == 0 and l1.b > 0)
    assert (l1.a, l1.b, l1.c) == pytest.approx((l2.a, l2.b, l2.c), abs=1e-12)


def test_is_simple():
    assert is_simple(Ring([(0, 0), (4, 0), (4, 3), (0, 3)]))
    assert not is_simple(Ring([(0, 0), (4, 4), (4, 0), (0, 6)]))


def test_distance_to_boundary():
    square = Ring([(0, 0), (2, 0), (2, 2), (0, 2)])
    d = distance_to_boundary(np.array([[1.0, 1.0], [3.0, 1.0], [0.0, 0.0]]), square)
    assert d == pytest.approx([1.0, 1.0, 0.0])
