"""Synthetic footprints with known ground truth.

A case starts from an ideal polygon, is rasterized into the staircase
outline a pixel tracer would produce, and then gets triangular burrs
injected at known positions. Geometric augmentations (rotation, flips,
scale, shear, translation, mild perspective) are available separately.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import HorizonCrossing, ShapeTooSmall, SingularTransform, TooManyBurrs
from .geometry import Orientation, Point, Ring, is_simple, rotate_points

SHAPES = ("rectangle", "lshape", "pentagon", "random_orthogonal")


@dataclass(frozen=True)
class SynthSpec:
    shape: str = "lshape"
    gsd: float = 0.25
    rotation: float = 0.0
    burr_count: int = 0
    burr_amplitude: float = 0.4
    burr_base: float = 0.15
    seed: int = 0
    corners: int = 8
    staircase: bool = True

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if not self.gsd > 0:
            raise ValueError("gsd must be positive")
        if not self.burr_amplitude > 0 or not self.burr_base > 0:
            raise ValueError("burr amplitude and base must be positive")
        if self.burr_count < 0:
            raise ValueError("burr_count must be non-negative")
        if self.shape == "random_orthogonal" and (self.corners < 4 or self.corners % 2):
            raise ValueError("an orthogonal polygon needs an even corner count >= 4")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SynthCase:
    clean: Ring
    noisy: Ring
    burr_indices: tuple[int, ...]
    true_corner_count: int
    spec: SynthSpec = field(default_factory=SynthSpec)


# -- ideal shapes -------------------------------------------------------------


def _rectangle(rng) -> list[tuple[float, float]]:
    w, h = rng.uniform(10.0, 24.0), rng.uniform(7.0, 16.0)
    return [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]


def _lshape(rng) -> list[tuple[float, float]]:
    w, h = rng.uniform(24.0, 40.0), rng.uniform(20.0, 34.0)
    cut_w = w * rng.uniform(0.35, 0.6)
    cut_h = h * rng.uniform(0.35, 0.6)
    return [(0.0, 0.0), (w, 0.0), (w, h - cut_h), (w - cut_w, h - cut_h), (w - cut_w, h), (0.0, h)]


def _pentagon(rng) -> list[tuple[float, float]]:
    r = rng.uniform(7.0, 12.0)
    angles = 90.0 + 72.0 * np.arange(5) + rng.uniform(-6.0, 6.0, size=5)
    radii = r * rng.uniform(0.9, 1.1, size=5)
    t = np.radians(angles)
    return list(zip((radii * np.cos(t)).tolist(), (radii * np.sin(t)).tolist()))


def _random_orthogonal(rng, corners: int) -> list[tuple[float, float]]:
    """Rectangle with rectangular notches cut from convex corners."""
    pts = _rectangle(rng)
    pts = [(x * 1.8, y * 1.8) for x, y in pts]
    attempts = 0
    while len(pts) < corners:
        attempts += 1
        if attempts > 200 * corners:
            raise RuntimeError("could not grow the orthogonal polygon")
        n = len(pts)
        k = int(rng.integers(n))
        prev, c, nxt = np.array(pts[k - 1]), np.array(pts[k]), np.array(pts[(k + 1) % n])
        if (c[0] - prev[0]) * (nxt[1] - c[1]) - (c[1] - prev[1]) * (nxt[0] - c[0]) <= 0:
            continue  # reflex corner
        len_p, len_n = np.linalg.norm(prev - c), np.linalg.norm(nxt - c)
        if min(len_p, len_n) < 8.0:
            continue
        d1 = rng.uniform(3.0, 0.45 * len_p)
        d2 = rng.uniform(3.0, 0.45 * len_n)
        up, un = (prev - c) / len_p, (nxt - c) / len_n
        a, inner, b = c + d1 * up, c + d1 * up + d2 * un, c + d2 * un
        candidate = pts[:k] + [tuple(a), tuple(inner), tuple(b)] + pts[k + 1 :]
        ring = Ring(candidate)
        if ring.orientation is Orientation.CCW and is_simple(ring):
            pts = [(float(x), float(y)) for x, y in candidate]
    return pts


def ideal_polygon(spec: SynthSpec, rng=None) -> Ring:
    """Ideal CCW polygon for ``spec``, rotated and placed away from the origin."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    if spec.shape == "rectangle":
        pts = _rectangle(rng)
    elif spec.shape == "lshape":
        pts = _lshape(rng)
    elif spec.shape == "pentagon":
        pts = _pentagon(rng)
    else:
        pts = _random_orthogonal(rng, spec.corners)
    arr = np.asarray(pts, dtype=float)
    arr = rotate_points(arr - arr.mean(axis=0), spec.rotation)
    arr = arr + rng.uniform(20.0, 60.0, size=2)
    return Ring(arr.tolist())


# -- rasterization ------------------------------------------------------------


def _inside(px: np.ndarray, py: np.ndarray, ring: Ring) -> np.ndarray:
    """Even-odd point-in-polygon test, vectorized over the query points."""
    arr = ring.array
    inside = np.zeros(px.shape, dtype=bool)
    x0, y0 = arr[:, 0], arr[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        if ay == by:
            continue
        straddle = (ay > py) != (by > py)
        xcross = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= straddle & (px < xcross)
    return inside


def rasterize(ring: Ring, gsd: float, origin: Sequence[float] = (0.0, 0.0)):
    """Cell mask of ``ring`` on a grid of pitch ``gsd`` anchored at ``origin``.

    A cell is inside when its center is. Returns ``(mask, i0, j0)`` where
    ``mask[j, i]`` is the cell with lower-left grid corner ``(i0 + i, j0 + j)``.
    """
    arr = ring.array
    ox, oy = origin
    i0 = int(math.floor((arr[:, 0].min() - ox) / gsd)) - 1
    j0 = int(math.floor((arr[:, 1].min() - oy) / gsd)) - 1
    i1 = int(math.ceil((arr[:, 0].max() - ox) / gsd)) + 1
    j1 = int(math.ceil((arr[:, 1].max() - oy) / gsd)) + 1
    ci = np.arange(i0, i1)
    cj = np.arange(j0, j1)
    px = ox + (ci[None, :] + 0.5) * gsd
    py = oy + (cj[:, None] + 0.5) * gsd
    px, py = np.broadcast_arrays(px, py)
    return _inside(px, py, ring), i0, j0


def trace_boundary(mask: np.ndarray) -> list[tuple[int, int]]:
    """Outer boundary of the first foreground region as grid-corner indices.

    Follows the cell edges separating foreground from background with the
    foreground on the left, so the result is counter-clockwise. At a corner
    shared by two diagonal foreground cells the tracer turns left, which
    keeps diagonal neighbors apart (4-connectivity).
    """
    padded = np.pad(mask.astype(bool), 1)
    h, w = padded.shape
    nxt: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(a, b):
        nxt.setdefault(a, []).append(b)

    js, is_ = np.nonzero(padded)
    for j, i in zip(js.tolist(), is_.tolist()):
        # Corner coordinates are in the unpadded frame.
        x, y = i - 1, j - 1
        if not padded[j - 1, i]:
            add((x, y), (x + 1, y))
        if not padded[j, i + 1]:
            add((x + 1, y), (x + 1, y + 1))
        if not padded[j + 1, i]:
            add((x + 1, y + 1), (x, y + 1))
        if not padded[j, i - 1]:
            add((x, y + 1), (x, y))
    if not nxt:
        return []
    start = min(nxt, key=lambda p: (p[1], p[0]))
    path = [start]
    cur = start
    heading = None
    used: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    while True:
        options = [b for b in nxt[cur] if (cur, b) not in used]
        if len(options) > 1 and heading is not None:
            hx, hy = heading

            def rank(b):
                dx, dy = b[0] - cur[0], b[1] - cur[1]
                z = hx * dy - hy * dx
                return 0 if z > 0 else (1 if z == 0 else 2)

            options.sort(key=rank)
        b = options[0]
        used.add((cur, b))
        heading = (b[0] - cur[0], b[1] - cur[1])
        cur = b
        if cur == start:
            break
        path.append(cur)
    return path


def staircase_trace(clean: Ring, gsd: float, seed: int | None = None) -> Ring:
    """Staircase outline of ``clean`` as a raster tracer would produce it.

    With ``seed=None`` the grid is anchored at the coordinate origin;
    otherwise the seed picks a sub-pixel grid phase. Every grid corner on
    the traced boundary becomes a vertex (collinear vertices are kept).
    """
    arr = clean.array
    if np.ptp(arr[:, 0]) < 4 * gsd or np.ptp(arr[:, 1]) < 4 * gsd:
        raise ShapeTooSmall(f"polygon extent must be at least {4 * gsd} m in both axes")
    if seed is None:
        origin = (0.0, 0.0)
    else:
        origin = tuple(np.random.default_rng(seed).uniform(0.0, gsd, size=2).tolist())
    mask, i0, j0 = rasterize(clean, gsd, origin)
    corners = trace_boundary(mask)
    pts = [(origin[0] + (i0 + i) * gsd, origin[1] + (j0 + j) * gsd) for i, j in corners]
    ring = Ring(pts)
    return ring.oriented(clean.orientation)


# -- burrs --------------------------------------------------------------------

# Base vertices stay this far from true corners. It equals the default
# short-edge gate, so a true corner never ends up with two short incident
# edges and a tiny triangle, which would make it look like a notch.
CORNER_CLEARANCE = 0.5


def inject_burrs(
    ring: Ring,
    count: int,
    amplitude: float,
    base: float,
    seed: int,
    avoid: Sequence[Sequence[float]] | None = None,
) -> tuple[Ring, list[int]]:
    """Insert ``count`` triangular burrs, alternating outward and inward.

    Each burr replaces a stretch of one edge by two base vertices and an apex
    ``amplitude`` away from the edge. Burr centers keep ``2 * base`` clear of
    every point in ``avoid`` (the ring's own vertices by default), and base
    vertices keep at least ``CORNER_CLEARANCE`` clear of them; burrs keep
    ``3 * base`` clear of each other. Returns the new ring and apex indices.
    """
    if count == 0:
        return ring, []
    arr = ring.array
    n = len(arr)
    avoid_arr = arr if avoid is None else np.asarray(avoid, dtype=float).reshape(-1, 2)
    seg = np.roll(arr, -1, axis=0) - arr
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    margin = 0.6 * base
    usable = np.clip(lengths - 2 * margin, 0.0, None)
    slots = int(np.floor(usable / (3 * base)).sum()) + int(((usable > 0) & (usable < 3 * base)).sum())
    if count > slots:
        raise TooManyBurrs(f"room for at most {slots} burrs, asked for {count}")

    clearance = max(2 * base, CORNER_CLEARANCE + 0.5 * base)
    sign = 1.0 if ring.orientation is Orientation.CCW else -1.0
    rng = np.random.default_rng(seed)
    weights = usable / usable.sum()
    chosen: list[tuple[int, float, np.ndarray]] = []
    attempts = 0
    while len(chosen) < count:
        attempts += 1
        if attempts > 500 * count:
            raise TooManyBurrs(f"could only place {len(chosen)} of {count} burrs")
        e = int(rng.choice(n, p=weights))
        t = margin + rng.uniform(0.0, usable[e])
        center = arr[e] + seg[e] * (t / lengths[e])
        if np.hypot(*(avoid_arr - center).T).min() < clearance:
            continue
        if any(np.hypot(*(c - center)) < 3 * base for _, _, c in chosen):
            continue
        chosen.append((e, t, center))

    # Alternate by placement order, then insert edge by edge.
    plan = []
    for k, (e, t, center) in enumerate(chosen):
        outward = k % 2 == 0
        plan.append((e, t, center, outward))
    plan.sort(key=lambda item: (item[0], item[1]))
    out: list[tuple[float, float]] = []
    apexes: list[int] = []
    by_edge: dict[int, list] = {}
    for item in plan:
        by_edge.setdefault(item[0], []).append(item)
    for e in range(n):
        out.append((float(arr[e, 0]), float(arr[e, 1])))
        for _, t, center, outward in by_edge.get(e, []):
            u = seg[e] / lengths[e]
            # Left normal points into a CCW ring.
            inward_normal = sign * np.array([-u[1], u[0]])
            apex = center + (-1.0 if outward else 1.0) * amplitude * inward_normal
            b1 = center - 0.5 * base * u
            b2 = center + 0.5 * base * u
            out.append((float(b1[0]), float(b1[1])))
            apexes.append(len(out))
            out.append((float(apex[0]), float(apex[1])))
            out.append((float(b2[0]), float(b2[1])))
    return Ring(out), apexes


# -- augmentation -------------------------------------------------------------


def affine_matrix(
    rotation: float = 0.0,
    scale: float = 1.0,
    shear: float = 0.0,
    tx: float = 0.0,
    ty: float = 0.0,
    flip_x: bool = False,
    flip_y: bool = False,
) -> np.ndarray:
    """2x3 map: flip, then shear, then uniform scale, then rotate, then translate."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    if not abs(shear) < 1:
        raise ValueError("shear must satisfy |shear| < 1")
    theta = math.radians(rotation)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    sh = np.array([[1.0, shear], [0.0, 1.0]])
    flip = np.diag([-1.0 if flip_x else 1.0, -1.0 if flip_y else 1.0])
    linear = rot @ (scale * sh) @ flip
    return np.hstack([linear, [[tx], [ty]]])


def apply_matrix(ring: Ring, matrix: np.ndarray) -> Ring:
    m = np.asarray(matrix, dtype=float)
    if abs(np.linalg.det(m[:, :2])) < 1e-12:
        raise SingularTransform("affine map is singular")
    out = ring.array @ m[:, :2].T + m[:, 2]
    return Ring(out.tolist())


def apply_affine(
    ring: Ring,
    rotation: float = 0.0,
    scale: float = 1.0,
    shear: float = 0.0,
    tx: float = 0.0,
    ty: float = 0.0,
    flip_x: bool = False,
    flip_y: bool = False,
) -> Ring:
    """Rotate (degrees, about the origin), scale, shear, flip and translate."""
    return apply_matrix(ring, affine_matrix(rotation, scale, shear, tx, ty, flip_x, flip_y))


def perspective_matrix(strength: float, seed: int) -> np.ndarray:
    """Homography ``I + P`` with random bottom-row terms bounded by ``strength``."""
    if not 0.0 <= strength <= 0.01:
        raise ValueError("strength must lie in [0, 0.01] per meter")
    g, h = np.random.default_rng(seed).uniform(-strength, strength, size=2)
    return np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [g, h, 1.0]])


def apply_perspective_perturbation(ring: Ring, strength: float, seed: int) -> Ring:
    """Mild projective distortion about the ring centroid (sensor tilt)."""
    hom = perspective_matrix(strength, seed)
    arr = ring.array
    center = arr.mean(axis=0)
    local = arr - center
    w = hom[2, 0] * local[:, 0] + hom[2, 1] * local[:, 1] + hom[2, 2]
    if (w <= 0).any():
        raise HorizonCrossing("a vertex maps across the horizon line")
    out = local / w[:, None] + center
    return Ring(out.tolist())


# -- cases and corpora --------------------------------------------------------


def make_case(spec: SynthSpec) -> SynthCase:
    rng = np.random.default_rng(spec.seed)
    clean = ideal_polygon(spec, rng)
    trace_seed = int(rng.integers(2**63))
    burr_seed = int(rng.integers(2**63))
    noisy = staircase_trace(clean, spec.gsd, trace_seed) if spec.staircase else clean
    noisy, apexes = inject_burrs(
        noisy, spec.burr_count, spec.burr_amplitude, spec.burr_base, burr_seed, avoid=clean.vertices
    )
    return SynthCase(clean, noisy, tuple(apexes), len(clean), spec)


def corpus_specs(count: int, seed: int, **fixed) -> list[SynthSpec]:
    """``count`` specs with per-case seeds drawn from ``seed``.

    Keyword arguments fix spec fields; ``rotation`` defaults to a uniform draw
    in [0, 90) and ``burr_count`` may be given as an ``(lo, hi)`` range.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        fields = dict(fixed)
        case_seed = int(rng.integers(2**63))
        rotation = float(rng.uniform(0.0, 90.0))
        if "rotation" not in fields:
            fields["rotation"] = rotation
        burrs = fields.get("burr_count", 0)
        draw = int(rng.integers(0, 2**31))
        if isinstance(burrs, tuple):
            fields["burr_count"] = burrs[0] + draw % (burrs[1] - burrs[0] + 1)
        specs.append(SynthSpec(seed=case_seed, **fields))
    return specs


def make_corpus(count: int, seed: int, **fixed) -> list[SynthCase]:
    return [make_case(s) for s in corpus_specs(count, seed, **fixed)]
