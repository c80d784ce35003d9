"""Douglas-Peucker simplification with original-to-simplified index mapping.

The tolerance ``epsilon`` is the largest perpendicular distance any removed
vertex may have from the simplified edge that replaces it. Typical values:
0.1 m or less for cadastral work, 0.5 to 2 m for planning-scale maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from numba import njit

from .geometry import Polyline, Ring

DEFAULT_EPSILON = 0.5

PRESETS = {
    "cadastral": 0.1,
    "planning": 1.0,
}


@dataclass(frozen=True)
class SimplifyConfig:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")

    @classmethod
    def preset(cls, name: str) -> "SimplifyConfig":
        return cls(PRESETS[name])


@dataclass(frozen=True)
class SegmentRun:
    """One simplified edge and the contiguous original vertices it replaced.

    For rings the run may wrap past the last vertex; ``n`` is then the ring
    length and ``start > end`` (or ``start == end`` for a full loop).
    """

    start: int
    end: int
    n: int | None = None

    @property
    def simplified_edge(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def original_indices(self) -> list[int]:
        if self.end > self.start:
            return list(range(self.start, self.end + 1))
        if self.n is None:
            raise ValueError("wrapping run needs the ring length")
        return list(range(self.start, self.n)) + list(range(0, self.end + 1))

    def __len__(self) -> int:
        if self.end > self.start:
            return self.end - self.start + 1
        return self.n - self.start + self.end + 1


@dataclass(frozen=True)
class SplitStep:
    """One decision of the divide step: chord (start, end) and its farthest vertex."""

    start: int
    end: int
    farthest: int
    d_max: float
    split: bool


@dataclass(frozen=True)
class SimplifyResult:
    """Retained vertex indices; ``ring_length`` is set when the input was a ring."""

    retained: tuple[int, ...]
    epsilon: float
    trace: tuple[SplitStep, ...] = field(default=(), compare=False, repr=False)
    ring_length: int | None = None

    @cached_property
    def runs(self) -> tuple[SegmentRun, ...]:
        # Built on first use: large inputs can keep millions of vertices.
        if self.ring_length is not None:
            return tuple(ring_runs(self.retained, self.ring_length))
        kept = self.retained
        return tuple(SegmentRun(i, j) for i, j in zip(kept, kept[1:]))


def _coords(line: Union[Polyline, Ring, np.ndarray, Sequence]) -> np.ndarray:
    if isinstance(line, (Polyline, Ring)):
        return line.array
    arr = np.asarray(line, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) coordinate array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("coordinates must be finite")
    return arr


@njit(cache=True)
def _dp_kernel(x, y, epsilon):
    """Breadth-first Douglas-Peucker over the chain ``(x, y)``.

    Returns the keep mask and, for every chord examined, its start, end,
    farthest vertex, distance and split decision. Each split queues two
    chords, so 2n slots bound both the queue and the step log.
    """
    n = x.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    keep[0] = True
    keep[n - 1] = True
    q_start = np.empty(2 * n, dtype=np.int64)
    q_end = np.empty(2 * n, dtype=np.int64)
    q_start[0] = 0
    q_end[0] = n - 1
    head, tail = 0, 1
    far_log = np.empty(2 * n, dtype=np.int64)
    d_log = np.empty(2 * n)
    examined = np.zeros(2 * n, dtype=np.bool_)
    while head < tail:
        s, e = q_start[head], q_end[head]
        slot = head
        head += 1
        if e - s < 2:
            continue
        sx, sy = x[s], y[s]
        dx, dy = x[e] - sx, y[e] - sy
        chord = math.hypot(dx, dy)
        best, far = -1.0, s + 1
        for k in range(s + 1, e):
            if chord > 0.0:
                # |cross| is distance times chord length; the chord is fixed
                # here, so the argmax is the same and one division suffices.
                c = abs(dx * (y[k] - sy) - dy * (x[k] - sx))
            else:
                c = math.hypot(x[k] - sx, y[k] - sy)
            if c > best:  # strict: ties keep the lowest index
                best, far = c, k
        d = best / chord if chord > 0.0 else best
        examined[slot] = True
        far_log[slot] = far
        d_log[slot] = d
        if d > epsilon:
            keep[far] = True
            q_start[tail], q_end[tail] = s, far
            q_start[tail + 1], q_end[tail + 1] = far, e
            tail += 2
    return keep, q_start[:tail], q_end[:tail], far_log[:tail], d_log[:tail], examined[:tail]


def _dp(arr: np.ndarray, epsilon: float, record: bool) -> tuple[np.ndarray, list[SplitStep]]:
    """Douglas-Peucker over ``arr`` with both endpoints kept.

    Chords are processed breadth-first; with ``record`` the decision for
    every chord with interior vertices is returned in that order. A chord
    whose endpoints coincide measures plain distance to that point.
    """
    x = np.ascontiguousarray(arr[:, 0], dtype=np.float64)
    y = np.ascontiguousarray(arr[:, 1], dtype=np.float64)
    keep, starts, ends, far, dmax, examined = _dp_kernel(x, y, float(epsilon))
    steps: list[SplitStep] = []
    if record:
        steps = [
            SplitStep(int(s), int(e), int(f), float(m), bool(m > epsilon))
            for s, e, f, m in zip(starts[examined], ends[examined], far[examined], dmax[examined])
        ]
    return np.flatnonzero(keep), steps


def douglas_peucker(line, cfg: SimplifyConfig = SimplifyConfig(), *, trace: bool = False) -> SimplifyResult:
    """Simplify an open polyline.

    ``line`` may be a :class:`Polyline` or an ``(n, 2)`` array. A chord is
    split at its farthest vertex only when that distance strictly exceeds
    ``cfg.epsilon``; ties go to the lowest index.
    """
    arr = _coords(line)
    if len(arr) < 2:
        raise ValueError("a polyline needs at least 2 vertices")
    retained, steps = _dp(arr, cfg.epsilon, trace)
    return SimplifyResult(tuple(retained.tolist()), cfg.epsilon, tuple(steps))


def _hull_indices(arr: np.ndarray) -> list[int]:
    """Indices of convex hull vertices (monotone chain, collinear points dropped)."""
    order = sorted(range(len(arr)), key=lambda k: (arr[k, 0], arr[k, 1]))

    def half(seq):
        out: list[int] = []
        for k in seq:
            while len(out) >= 2:
                o, a = arr[out[-2]], arr[out[-1]]
                b = arr[k]
                if (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(k)
        return out

    lower = half(order)
    upper = half(reversed(order))
    return sorted(set(lower[:-1] + upper[:-1]))


def diameter_pair(arr: np.ndarray) -> tuple[int, int]:
    """Vertex pair at maximum mutual distance, lowest (i, j) on ties.

    The farthest pair always lies on the convex hull, so only hull vertices
    are compared exhaustively.
    """
    hull = np.array(_hull_indices(arr)) if len(arr) > 3 else np.arange(len(arr))
    if len(hull) < 2:
        hull = np.arange(len(arr))
    pts = arr[hull]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    best = d2.max()
    ii, jj = np.nonzero(d2 == best)
    pairs = sorted((int(min(hull[a], hull[b])), int(max(hull[a], hull[b]))) for a, b in zip(ii, jj))
    return pairs[0]


def simplify_ring(ring: Ring, cfg: SimplifyConfig = SimplifyConfig(), *, trace: bool = False) -> SimplifyResult:
    """Simplify a closed ring.

    The ring is cut at its diameter pair into two open chains, each chain is
    simplified, and the results are merged. If fewer than three vertices
    survive, epsilon is halved and the ring simplified again.
    """
    arr = _coords(ring)
    n = len(arr)
    i, j = diameter_pair(arr)
    first = np.arange(i, j + 1)
    second = np.concatenate((np.arange(j, n), np.arange(0, i + 1)))
    eps = cfg.epsilon
    while True:
        kept_a, steps_a = _dp(arr[first], eps, trace)
        kept_b, steps_b = _dp(arr[second], eps, trace)
        retained = sorted(set(first[kept_a].tolist()) | set(second[kept_b].tolist()))
        if len(retained) >= 3:
            break
        eps /= 2.0
    steps = [
        SplitStep(int(first[s.start]), int(first[s.end]), int(first[s.farthest]), s.d_max, s.split) for s in steps_a
    ] + [SplitStep(int(second[s.start]), int(second[s.end]), int(second[s.farthest]), s.d_max, s.split) for s in steps_b]
    return SimplifyResult(tuple(retained), eps, tuple(steps), ring_length=n)


def ring_runs(retained: Sequence[int], n: int) -> list[SegmentRun]:
    """Cyclic runs between consecutive retained indices of an ``n``-vertex ring."""
    kept = sorted(retained)
    return [SegmentRun(a, b, n) for a, b in zip(kept, kept[1:] + kept[:1])]
