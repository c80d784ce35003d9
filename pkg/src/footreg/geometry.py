"""Planar primitives and low-level predicates.

Coordinates are metric (meters in a projected CRS). Every function here is
pure; the value types are immutable and safe to share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateAngle, DegenerateChord, InvalidRing, NearParallel

#: Coincidence tolerance for predicates, in meters (m^2 for cross products).
EPS = 1e-12

#: Lines closer to parallel than this are refused by :func:`line_intersection`.
PARALLEL_SIN = math.sin(math.radians(1.0))


class Point(NamedTuple):
    x: float
    y: float


class Orientation(enum.Enum):
    CCW = "CCW"
    CW = "CW"


class Turn(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    STRAIGHT = "Straight"


def _as_points(vertices: Iterable[Sequence[float]]) -> tuple[Point, ...]:
    pts = tuple(Point(float(v[0]), float(v[1])) for v in vertices)
    for p in pts:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise InvalidRing(f"non-finite coordinate {p}")
    return pts


def _shoelace(pts: Sequence[Point]) -> float:
    n = len(pts)
    if n < 3:
        return 0.0
    arr = np.asarray(pts, dtype=float)
    # Shift to the first vertex to keep the cross products well conditioned.
    x = arr[:, 0] - arr[0, 0]
    y = arr[:, 1] - arr[0, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True)
class Polyline:
    """Open chain of at least two vertices."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        pts = _as_points(self.vertices)
        object.__setattr__(self, "vertices", pts)
        if len(pts) < 2:
            raise InvalidRing("a polyline needs at least 2 vertices")
        for a, b in zip(pts, pts[1:]):
            if math.hypot(b.x - a.x, b.y - a.y) <= EPS:
                raise InvalidRing(f"consecutive duplicate vertex {a}")

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.vertices, dtype=float)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class Ring:
    """Closed polygon boundary; the closing edge back to vertex 0 is implied."""

    vertices: tuple[Point, ...]
    orientation: Orientation = field(init=False, compare=False)

    def __post_init__(self):
        pts = _as_points(self.vertices)
        object.__setattr__(self, "vertices", pts)
        if len(pts) < 3:
            raise InvalidRing(f"a ring needs at least 3 vertices, got {len(pts)}")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            if math.hypot(b.x - a.x, b.y - a.y) <= EPS:
                raise InvalidRing(f"consecutive duplicate vertex {a}")
        area = _shoelace(pts)
        if area == 0.0 or not math.isfinite(area):
            raise InvalidRing("ring has zero signed area")
        object.__setattr__(self, "orientation", Orientation.CCW if area > 0 else Orientation.CW)

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, i: int) -> Point:
        return self.vertices[i % len(self.vertices)]

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.vertices, dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def area(self) -> float:
        return signed_area(self)

    def reversed(self) -> "Ring":
        return Ring(self.vertices[::-1])

    def oriented(self, orientation: Orientation) -> "Ring":
        return self if self.orientation is orientation else self.reversed()


@dataclass(frozen=True)
class Line:
    """Infinite line ``a*x + b*y + c = 0`` with ``a**2 + b**2 == 1``.

    Construct through :meth:`from_coefficients` or :meth:`through` so the
    representation is canonical: ``a > 0``, or ``a == 0`` and ``b > 0``.
    """

    a: float
    b: float
    c: float

    @classmethod
    def from_coefficients(cls, a: float, b: float, c: float) -> "Line":
        norm = math.hypot(a, b)
        if not norm > 0 or not math.isfinite(norm):
            raise DegenerateChord("line normal has zero length")
        a, b, c = a / norm, b / norm, c / norm
        if a < 0 or (a == 0 and b < 0):
            a, b, c = -a, -b, -c
        # Normalize -0.0 so equal lines compare equal.
        return cls(a + 0.0, b + 0.0, c + 0.0)

    @classmethod
    def through(cls, p: Point, q: Point) -> "Line":
        dx, dy = q[0] - p[0], q[1] - p[1]
        if math.hypot(dx, dy) <= EPS:
            raise DegenerateChord("cannot build a line through coincident points")
        return cls.from_coefficients(-dy, dx, dy * p[0] - dx * p[1])

    @property
    def direction(self) -> tuple[float, float]:
        return (-self.b, self.a)

    def evaluate(self, p: Sequence[float]) -> float:
        return self.a * p[0] + self.b * p[1] + self.c

    def angle_deg(self) -> float:
        """Direction angle in [0, 180)."""
        return math.degrees(math.atan2(self.a, -self.b)) % 180.0


def perpendicular_distance(p: Sequence[float], chord_start: Sequence[float], chord_end: Sequence[float]) -> float:
    """Distance from ``p`` to the infinite line through the chord."""
    dx = chord_end[0] - chord_start[0]
    dy = chord_end[1] - chord_start[1]
    length = math.hypot(dx, dy)
    if length <= EPS:
        raise DegenerateChord(f"chord endpoints coincide: {chord_start}")
    return abs(dx * (p[1] - chord_start[1]) - dy * (p[0] - chord_start[0])) / length


def signed_area(ring: Ring) -> float:
    """Shoelace area; positive for counter-clockwise rings."""
    return _shoelace(ring.vertices)


def vertex_angle(prev: Sequence[float], v: Sequence[float], next: Sequence[float]) -> float:
    """Angle at ``v`` between the rays towards ``prev`` and ``next``, in [0, 180]."""
    ux, uy = prev[0] - v[0], prev[1] - v[1]
    wx, wy = next[0] - v[0], next[1] - v[1]
    if math.hypot(ux, uy) <= EPS or math.hypot(wx, wy) <= EPS:
        raise DegenerateAngle(f"neighbor coincides with vertex {tuple(v)}")
    return math.degrees(math.atan2(abs(ux * wy - uy * wx), ux * wx + uy * wy))


def triangle_area(p1: Sequence[float], p2: Sequence[float], p3: Sequence[float]) -> float:
    return 0.5 * abs((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0]))


def cross_turn(prev: Sequence[float], v: Sequence[float], next: Sequence[float]) -> float:
    """z-component of ``(v - prev) x (next - v)``."""
    return (v[0] - prev[0]) * (next[1] - v[1]) - (v[1] - prev[1]) * (next[0] - v[0])


def turn_sign(prev: Sequence[float], v: Sequence[float], next: Sequence[float]) -> Turn:
    z = cross_turn(prev, v, next)
    if abs(z) < EPS:
        return Turn.STRAIGHT
    return Turn.LEFT if z > 0 else Turn.RIGHT


def project_point(line: Line, p: Sequence[float]) -> Point:
    """Orthogonal projection of ``p`` onto ``line``."""
    r = line.a * p[0] + line.b * p[1] + line.c
    return Point(p[0] - r * line.a, p[1] - r * line.b)


def line_intersection(l1: Line, l2: Line) -> Point:
    det = l1.a * l2.b - l2.a * l1.b
    if abs(det) < PARALLEL_SIN:
        raise NearParallel(f"lines are within 1 degree of parallel (|sin| = {abs(det):.3g})")
    x = (l1.b * l2.c - l2.b * l1.c) / det
    y = (l2.a * l1.c - l1.a * l2.c) / det
    return Point(x, y)


def line_angle_between(l1: Line, l2: Line) -> float:
    """Acute angle between two undirected lines, in degrees."""
    s = abs(l1.a * l2.b - l2.a * l1.b)
    c = abs(l1.a * l2.a + l1.b * l2.b)
    return math.degrees(math.atan2(s, c))


def point_segment_distances(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Distance matrix (points x segments) to closed segments."""
    p = np.asarray(points, dtype=float)[:, None, :]
    a = np.asarray(seg_a, dtype=float)[None, :, :]
    d = np.asarray(seg_b, dtype=float)[None, :, :] - a
    len2 = np.einsum("...k,...k->...", d, d)
    t = np.einsum("...k,...k->...", p - a, d) / np.where(len2 > 0, len2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * d
    return np.hypot(*(p - closest).transpose(2, 0, 1))


def distance_to_boundary(points: np.ndarray, ring: Ring) -> np.ndarray:
    """Distance from each point to the closed boundary of ``ring``."""
    arr = ring.array
    return point_segment_distances(points, arr, np.roll(arr, -1, axis=0)).min(axis=1)


def is_simple(ring: Ring) -> bool:
    """True when no two non-adjacent edges touch or cross."""
    arr = ring.array
    n = len(arr)
    if n == 3:
        return True
    a = arr
    b = np.roll(arr, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    # Edge n-1 and edge 0 share vertex 0.
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def orient(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])

    p1, p2, q1, q2 = a[i], b[i], a[j], b[j]
    scale = max(float(np.ptp(arr[:, 0])), float(np.ptp(arr[:, 1])), 1.0)
    tol = EPS * scale
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    s1, s2, s3, s4 = (np.where(np.abs(o) <= tol, 0, np.sign(o)) for o in (o1, o2, o3, o4))
    proper = (s1 * s2 < 0) & (s3 * s4 < 0)
    if proper.any():
        return False

    def on_segment(p, q, r):
        return (
            (np.minimum(p[:, 0], q[:, 0]) - tol <= r[:, 0])
            & (r[:, 0] <= np.maximum(p[:, 0], q[:, 0]) + tol)
            & (np.minimum(p[:, 1], q[:, 1]) - tol <= r[:, 1])
            & (r[:, 1] <= np.maximum(p[:, 1], q[:, 1]) + tol)
        )

    touch = (
        ((s1 == 0) & on_segment(p1, p2, q1))
        | ((s2 == 0) & on_segment(p1, p2, q2))
        | ((s3 == 0) & on_segment(q1, q2, p1))
        | ((s4 == 0) & on_segment(q1, q2, p2))
    )
    return not bool(touch.any())


def rotate_points(points: np.ndarray, degrees: float, center: Sequence[float] = (0.0, 0.0)) -> np.ndarray:
    theta = math.radians(degrees)
    c, s = math.cos(theta), math.sin(theta)
    p = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    out = np.empty_like(p)
    out[..., 0] = c * p[..., 0] - s * p[..., 1]
    out[..., 1] = s * p[..., 0] + c * p[..., 1]
    return out + np.asarray(center, dtype=float)


def drop_collinear(ring: Ring, tol: float = 1e-9) -> Ring:
    """Remove vertices whose turn is straight within ``tol`` (m^2 cross product)."""
    pts = list(ring.vertices)
    changed = True
    while changed and len(pts) > 3:
        changed = False
        keep = []
        n = len(pts)
        for k in range(n):
            prev = keep[-1] if keep else pts[k - 1]
            z = cross_turn(prev, pts[k], pts[(k + 1) % n])
            dot = (pts[k][0] - prev[0]) * (pts[(k + 1) % n][0] - pts[k][0]) + (pts[k][1] - prev[1]) * (
                pts[(k + 1) % n][1] - pts[k][1]
            )
            if abs(z) <= tol and dot > 0:
                changed = True
                continue
            keep.append(pts[k])
        pts = keep
    return Ring(pts)
