"""Burr (spike) detection and delete-and-reconnect repair.

A vertex is judged a burr only when several independent signals agree:
a sharp angle, two short incident edges, a near-zero triangle area, and a
local reversal of the turning direction. Removing vertex ``i`` joins
``i - 1`` directly to ``i + 1``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import RingCollapsed
from .geometry import EPS, Orientation, Point, Ring, Turn, cross_turn, triangle_area, turn_sign, vertex_angle

log = logging.getLogger(__name__)


class Criterion(enum.Enum):
    SHARP_ANGLE = "SharpAngle"
    SHORT_EDGES = "ShortEdges"
    TINY_AREA = "TinyArea"
    TURN_REVERSAL = "TurnReversal"


@dataclass(frozen=True)
class SpikeConfig:
    max_angle: float = 30.0
    max_edge: float = 0.5
    max_area: float = 0.05
    require_turn_reversal: bool = True
    min_criteria: int = 2
    max_passes: int = 16

    def __post_init__(self):
        if not 0.0 < self.max_angle < 180.0:
            raise ValueError(f"max_angle must lie in (0, 180), got {self.max_angle}")
        if not self.max_edge > 0:
            raise ValueError(f"max_edge must be positive, got {self.max_edge}")
        if not self.max_area >= 0:
            raise ValueError(f"max_area must be non-negative, got {self.max_area}")
        if not 1 <= self.min_criteria <= 4:
            raise ValueError(f"min_criteria must lie in [1, 4], got {self.min_criteria}")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")

    @classmethod
    def for_gsd(cls, gsd: float, **overrides) -> "SpikeConfig":
        """Scale the short-edge gate to two source pixels."""
        return cls(max_edge=2.0 * gsd, **overrides)


@dataclass(frozen=True)
class SpikeVerdict:
    vertex_index: int
    fired: frozenset
    removed: bool
    position: Point | None = None
    pass_number: int = 0
    refused: bool = False

    def to_dict(self) -> dict:
        return {
            "vertex_index": self.vertex_index,
            "fired": sorted(c.value for c in self.fired),
            "removed": self.removed,
            "refused": self.refused,
            "pass": self.pass_number,
            "position": None if self.position is None else [self.position.x, self.position.y],
        }


@dataclass(frozen=True)
class DespikeResult:
    ring: Ring
    verdicts: tuple[SpikeVerdict, ...]
    kept: tuple[int, ...]
    passes: int
    capped: bool


def _turn_reversed(pts: Sequence[Point], k: int, expected: Turn) -> bool:
    """Local turn reversal at ``pts[k]`` on a closed vertex list.

    Fires for a reflex vertex (turning against the ring orientation) and for
    a convex vertex whose two neighbors are both reflex, which is the apex of
    an outward burr.
    """
    n = len(pts)
    here = turn_sign(pts[k - 1], pts[k], pts[(k + 1) % n])
    if here is Turn.STRAIGHT:
        return False
    if here is not expected:
        return True
    if n < 5:
        return False
    before = turn_sign(pts[k - 2], pts[k - 1], pts[k])
    after = turn_sign(pts[k], pts[(k + 1) % n], pts[(k + 2) % n])
    opposite = Turn.RIGHT if expected is Turn.LEFT else Turn.LEFT
    return before is opposite and after is opposite


def _diagnose(pts: Sequence[Point], k: int, expected: Turn, cfg: SpikeConfig) -> tuple[frozenset, bool]:
    n = len(pts)
    prev, v, nxt = pts[k - 1], pts[k], pts[(k + 1) % n]
    fired = set()
    if vertex_angle(prev, v, nxt) < cfg.max_angle:
        fired.add(Criterion.SHARP_ANGLE)
    if math.dist(prev, v) < cfg.max_edge and math.dist(v, nxt) < cfg.max_edge:
        fired.add(Criterion.SHORT_EDGES)
    if triangle_area(prev, v, nxt) < cfg.max_area:
        fired.add(Criterion.TINY_AREA)
    if _turn_reversed(pts, k, expected):
        fired.add(Criterion.TURN_REVERSAL)
    removed = len(fired) >= cfg.min_criteria and (
        Criterion.TURN_REVERSAL in fired or not cfg.require_turn_reversal
    )
    return frozenset(fired), removed


def _expected_turn(ring: Ring) -> Turn:
    return Turn.LEFT if ring.orientation is Orientation.CCW else Turn.RIGHT


def diagnose_vertex(ring: Ring, i: int, cfg: SpikeConfig = SpikeConfig()) -> SpikeVerdict:
    """Evaluate the four burr criteria at vertex ``i`` (neighbors are cyclic)."""
    n = len(ring)
    k = i % n
    fired, removed = _diagnose(ring.vertices, k, _expected_turn(ring), cfg)
    return SpikeVerdict(k, fired, removed, ring.vertices[k])


def remove_spikes_detailed(ring: Ring, cfg: SpikeConfig = SpikeConfig()) -> DespikeResult:
    expected = _expected_turn(ring)
    pts = list(ring.vertices)
    ids = list(range(len(pts)))
    if len(pts) == 3 and all(_diagnose(pts, k, expected, cfg)[1] for k in range(3)):
        raise RingCollapsed("all three vertices of the ring are diagnosed as spikes")

    area2 = 2.0 * ring.area
    verdicts: list[SpikeVerdict] = []
    passes = 0
    capped = False
    pass_number = 0
    # Strongest evidence first: vertices firing every criterion are removed
    # before weaker candidates get a chance to reshape their neighborhoods.
    for tier in range(4, cfg.min_criteria - 1, -1):
        tier_cfg = replace(cfg, min_criteria=tier)
        for tier_pass in range(1, cfg.max_passes + 1):
            pass_number += 1
            removed_any = False
            k = 0
            while k < len(pts):
                fired, removed = _diagnose(pts, k, expected, tier_cfg)
                if not removed:
                    k += 1
                    continue
                n = len(pts)
                prev, nxt = pts[k - 1], pts[(k + 1) % n]
                new_area2 = area2 - cross_turn(prev, pts[k], nxt)
                refuse = n <= 3 or math.dist(prev, nxt) <= EPS or new_area2 * area2 <= 0 or abs(new_area2) <= EPS
                if refuse:
                    log.info("refusing to remove vertex %d: ring would degenerate", ids[k])
                    verdicts.append(SpikeVerdict(ids[k], fired, False, pts[k], pass_number, refused=True))
                    k += 1
                    continue
                verdicts.append(SpikeVerdict(ids[k], fired, True, pts[k], pass_number))
                del pts[k]
                del ids[k]
                area2 = new_area2
                removed_any = True
                # The predecessor's angle changed; look at it again before moving on.
                k = max(k - 1, 0)
            passes = max(passes, tier_pass)
            if not removed_any:
                break
        else:
            capped = True
            log.warning("spike removal stopped at the %d-pass cap", cfg.max_passes)
    out = ring if len(pts) == len(ring) else Ring(pts)
    return DespikeResult(out, tuple(verdicts), tuple(ids), passes, capped)


def remove_spikes(ring: Ring, cfg: SpikeConfig = SpikeConfig()) -> tuple[Ring, list[SpikeVerdict]]:
    """Remove burr vertices until a sweep removes nothing (or the pass cap).

    Returns the repaired ring and the verdict trail of every removal (and of
    every refused removal), indexed into the input ring.
    """
    result = remove_spikes_detailed(ring, cfg)
    return result.ring, list(result.verdicts)
