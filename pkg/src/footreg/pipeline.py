"""Full footprint regularization: simplify, despike, fit runs, rebuild corners."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .despike import SpikeConfig, SpikeVerdict, remove_spikes_detailed
from .errors import AllCoincident, FootregError, NearParallel, RebuildFailed, RingCollapsed
from .fitline import FitResult, tls_fit
from .geometry import (
    EPS,
    Point,
    Ring,
    distance_to_boundary,
    is_simple,
    line_angle_between,
    line_intersection,
    point_segment_distances,
    project_point,
)
from .simplify import SegmentRun, SimplifyConfig, ring_runs, simplify_ring

log = logging.getLogger(__name__)


class CornerMode(enum.Enum):
    INTERSECT = "intersect"
    PROJECT = "project"
    KEPT = "kept"


@dataclass(frozen=True)
class PipelineConfig:
    simplify: SimplifyConfig = field(default_factory=SimplifyConfig)
    spike: SpikeConfig = field(default_factory=SpikeConfig)
    despike_before_simplify: bool = True
    corner_mode: CornerMode = CornerMode.INTERSECT
    parallel_fallback_deg: float = 1.0
    min_run_points: int = 3

    def __post_init__(self):
        if isinstance(self.corner_mode, str):
            object.__setattr__(self, "corner_mode", CornerMode(self.corner_mode))
        if self.corner_mode is CornerMode.KEPT:
            raise ValueError("corner_mode must be intersect or project")
        if not 0.0 < self.parallel_fallback_deg < 45.0:
            raise ValueError("parallel_fallback_deg must lie in (0, 45)")
        if self.min_run_points < 2:
            raise ValueError("min_run_points must be at least 2")

    @property
    def order(self) -> str:
        return "despike-first" if self.despike_before_simplify else "dp-first"

    def to_dict(self) -> dict:
        return {
            "epsilon": self.simplify.epsilon,
            "spike": {
                "max_angle": self.spike.max_angle,
                "max_edge": self.spike.max_edge,
                "max_area": self.spike.max_area,
                "require_turn_reversal": self.spike.require_turn_reversal,
                "min_criteria": self.spike.min_criteria,
                "max_passes": self.spike.max_passes,
            },
            "order": self.order,
            "corner_mode": self.corner_mode.value,
            "parallel_fallback_deg": self.parallel_fallback_deg,
            "min_run_points": self.min_run_points,
        }


@dataclass(frozen=True)
class RunFit:
    """A segment run with its fitted line, or ``fit=None`` when skipped."""

    run: SegmentRun
    fit: FitResult | None
    n_points: int
    skipped_reason: str | None = None
    absorbed: bool = False

    def to_dict(self) -> dict:
        return {
            "run": [self.run.start, self.run.end],
            "n_points": self.n_points,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "skipped_reason": self.skipped_reason,
            "absorbed": self.absorbed,
        }


@dataclass
class RegularizationReport:
    input_vertex_count: int
    output_vertex_count: int = 0
    retained_indices: list[int] = field(default_factory=list)
    spike_verdicts: list[SpikeVerdict] = field(default_factory=list)
    per_run_fits: list[RunFit] = field(default_factory=list)
    corner_modes_used: list[CornerMode] = field(default_factory=list)
    max_deviation: float = 0.0
    area_before: float = 0.0
    area_after: float = 0.0
    epsilon_used: float = 0.0
    order: str = "dp-first"
    despike_passes: int = 0
    despike_capped: bool = False
    failed_stage: str | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed_stage is None and not self.warnings

    def to_dict(self) -> dict:
        return {
            "input_vertex_count": self.input_vertex_count,
            "output_vertex_count": self.output_vertex_count,
            "retained_indices": list(self.retained_indices),
            "spike_verdicts": [v.to_dict() for v in self.spike_verdicts],
            "per_run_fits": [f.to_dict() for f in self.per_run_fits],
            "corner_modes_used": [m.value for m in self.corner_modes_used],
            "max_deviation": self.max_deviation,
            "area_before": self.area_before,
            "area_after": self.area_after,
            "epsilon_used": self.epsilon_used,
            "order": self.order,
            "despike_passes": self.despike_passes,
            "despike_capped": self.despike_capped,
            "failed_stage": self.failed_stage,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class RegularizedRing:
    ring: Ring
    provenance: RegularizationReport


def segment_runs(original: Ring, retained: Sequence[int]) -> list[SegmentRun]:
    """One cyclic run per simplified edge, carrying every original vertex it spans."""
    n = len(original)
    kept = sorted(set(int(i) for i in retained))
    if len(kept) < 2 or kept[0] < 0 or kept[-1] >= n:
        raise ValueError("retained indices must name at least two vertices of the ring")
    return ring_runs(kept, n)


def fit_runs(
    original: Ring,
    runs: Sequence[SegmentRun],
    cfg: PipelineConfig = PipelineConfig(),
    active: np.ndarray | None = None,
) -> list[RunFit]:
    """Total least squares fit over each run's original vertices.

    ``active`` masks out vertices that must not feed the fit (removed burrs).
    Runs with fewer than ``cfg.min_run_points`` usable points are skipped and
    their edge is kept as it is.
    """
    arr = original.array
    out = []
    for run in runs:
        idx = run.original_indices
        if active is not None:
            idx = [i for i in idx if active[i]]
        if len(idx) < cfg.min_run_points:
            out.append(RunFit(run, None, len(idx), "too few points"))
            continue
        try:
            fit = tls_fit(arr[idx])
        except AllCoincident:
            log.warning("run %s has coincident points; keeping the edge", run.simplified_edge)
            out.append(RunFit(run, None, len(idx), "all points coincide"))
            continue
        out.append(RunFit(run, fit, len(idx)))
    return out


def _corner(vertex: Point, before: RunFit, after: RunFit, cfg: PipelineConfig) -> tuple[Point, CornerMode]:
    lines = [f.fit.line for f in (before, after) if f.fit is not None]
    if not lines:
        return vertex, CornerMode.KEPT
    if cfg.corner_mode is CornerMode.INTERSECT and len(lines) == 2:
        if line_angle_between(*lines) >= cfg.parallel_fallback_deg:
            try:
                return line_intersection(*lines), CornerMode.INTERSECT
            except NearParallel:
                pass
    projections = [project_point(line, vertex) for line in lines]
    x = sum(p.x for p in projections) / len(projections)
    y = sum(p.y for p in projections) / len(projections)
    return Point(x, y), CornerMode.PROJECT


def _corners(live: Sequence[RunFit], original: Ring, cfg: PipelineConfig) -> tuple[list[Point], list[CornerMode]]:
    corners, modes = [], []
    for k, current in enumerate(live):
        corner, mode = _corner(original[current.run.start], live[k - 1], current, cfg)
        corners.append(corner)
        modes.append(mode)
    return corners, modes


def consolidate_corners(
    fits: Sequence[RunFit],
    original: Ring,
    epsilon: float,
    cfg: PipelineConfig = PipelineConfig(),
    active: np.ndarray | None = None,
) -> list[RunFit]:
    """Absorb short runs that merely chamfer a corner.

    A run is absorbed when its two neighbors intersect close to it and every
    one of its (non-burr) original vertices stays within ``epsilon`` of the
    corner formed by that intersection, so the rebuilt boundary still honors
    the simplification tolerance. Runs with the fewest points go first.
    """
    out = list(fits)
    arr = original.array
    while True:
        live = [k for k, f in enumerate(out) if not f.absorbed]
        m = len(live)
        if m <= 3:
            return out
        corners, _ = _corners([out[k] for k in live], original, cfg)
        best = None
        for pos, k in enumerate(live):
            before, after = out[live[pos - 1]], out[live[(pos + 1) % m]]
            if before.fit is None or after.fit is None:
                continue
            if line_angle_between(before.fit.line, after.fit.line) < cfg.parallel_fallback_deg:
                continue
            try:
                x = line_intersection(before.fit.line, after.fit.line)
            except NearParallel:
                continue
            idx = out[k].run.original_indices
            if active is not None:
                idx = [i for i in idx if active[i]] or [out[k].run.start, out[k].run.end]
            pts = arr[idx]
            chord = math.dist(arr[out[k].run.start], arr[out[k].run.end])
            if np.hypot(*(pts - np.asarray(x)).T).min() > chord + epsilon:
                continue
            c_prev, c_next = corners[pos - 1], corners[(pos + 2) % m]
            path_a = np.array([c_prev, x])
            path_b = np.array([x, c_next])
            d = point_segment_distances(pts, np.array([path_a[0], path_b[0]]), np.array([path_a[1], path_b[1]]))
            if d.min(axis=1).max() > epsilon:
                continue
            key = (len(out[k].run), pos)
            if best is None or key < best[0]:
                best = (key, k)
        if best is None:
            return out
        k = best[1]
        out[k] = replace(out[k], absorbed=True)


def rebuild_ring(fits: Sequence[RunFit], original: Ring, cfg: PipelineConfig = PipelineConfig()) -> RegularizedRing:
    """Rebuild the polygon with one corner per simplified vertex.

    Corner ``k`` joins the fitted lines of runs ``k - 1`` and ``k``. In
    intersect mode it is their intersection; near-parallel lines and skipped
    runs fall back to projecting the simplified vertex onto the available
    lines and taking the midpoint.
    """
    live = [f for f in fits if not f.absorbed]
    if len(live) < 3:
        raise RebuildFailed(f"need at least 3 runs, got {len(live)}")
    corners, modes = _corners(live, original, cfg)
    # Consecutive corners can collapse when a run degenerates.
    dedup_pts, dedup_modes = [], []
    for p, m in zip(corners, modes):
        if dedup_pts and math.dist(p, dedup_pts[-1]) <= EPS:
            continue
        dedup_pts.append(p)
        dedup_modes.append(m)
    while len(dedup_pts) > 1 and math.dist(dedup_pts[0], dedup_pts[-1]) <= EPS:
        dedup_pts.pop()
        dedup_modes.pop()
    if len(dedup_pts) < 3:
        raise RebuildFailed("fewer than 3 distinct corners could be constructed")
    try:
        ring = Ring(dedup_pts)
    except FootregError as exc:
        raise RebuildFailed(f"rebuilt ring is invalid: {exc}") from exc
    report = RegularizationReport(
        input_vertex_count=len(original),
        output_vertex_count=len(ring),
        retained_indices=[f.run.start for f in live],
        per_run_fits=list(fits),
        corner_modes_used=dedup_modes,
        area_before=original.area,
        area_after=ring.area,
    )
    if ring.orientation is not original.orientation:
        report.warnings.append("rebuilt ring reversed orientation")
        ring = ring.oriented(original.orientation)
        report.area_after = ring.area
    return RegularizedRing(ring, report)


def regularize(ring: Ring, cfg: PipelineConfig = PipelineConfig()) -> RegularizedRing:
    """Simplify, despike, fit and rebuild one ring; never raises on stage errors.

    A failing stage stops the pipeline; the last good intermediate ring is
    returned and the report records the failure point.
    """
    n = len(ring)
    report = RegularizationReport(input_vertex_count=n, area_before=ring.area, order=cfg.order)
    active = np.ones(n, dtype=bool)
    current = ring

    def finish(out: Ring, stage: str | None = None, message: str | None = None) -> RegularizedRing:
        if stage is not None:
            report.failed_stage = stage
            report.warnings.append(f"{stage} failed: {message}")
            log.warning("%s failed: %s", stage, message)
        report.output_vertex_count = len(out)
        report.area_after = out.area
        report.max_deviation = float(distance_to_boundary(ring.array, out).max())
        if not is_simple(out):
            report.warnings.append("output ring self-intersects")
        return RegularizedRing(out, report)

    def despike(subject: Ring, index_map: Sequence[int]):
        try:
            result = remove_spikes_detailed(subject, cfg.spike)
        except RingCollapsed as exc:
            report.warnings.append(f"despike skipped: {exc}")
            return list(range(len(subject)))
        report.despike_passes = result.passes
        report.despike_capped = result.capped
        if result.capped:
            report.warnings.append(f"despike hit the {cfg.spike.max_passes}-pass cap")
        for v in result.verdicts:
            original_index = int(index_map[v.vertex_index])
            report.spike_verdicts.append(
                SpikeVerdict(original_index, v.fired, v.removed, v.position, v.pass_number, v.refused)
            )
            if v.removed:
                active[original_index] = False
        return list(result.kept)

    try:
        if cfg.despike_before_simplify:
            kept = despike(ring, range(n))
            working_index = np.asarray(kept)
            working = Ring(ring.array[working_index].tolist())
            current = working
            simplified = simplify_ring(working, cfg.simplify)
            retained = [int(working_index[i]) for i in simplified.retained]
        else:
            simplified = simplify_ring(ring, cfg.simplify)
            retained_dp = list(simplified.retained)
            current = Ring(ring.array[retained_dp].tolist())
            kept = despike(current, retained_dp)
            retained = [retained_dp[k] for k in kept]
        report.epsilon_used = simplified.epsilon
        current = Ring(ring.array[retained].tolist())
    except FootregError as exc:
        return finish(current, "simplify/despike", str(exc))

    report.retained_indices = list(retained)
    try:
        runs = segment_runs(ring, retained)
        fits = fit_runs(ring, runs, cfg)
        fits = consolidate_corners(fits, ring, report.epsilon_used, cfg, active)
        rebuilt = rebuild_ring(fits, ring, cfg)
    except FootregError as exc:
        report.per_run_fits = locals().get("fits", [])
        return finish(current, "rebuild", str(exc))
    report.per_run_fits = fits
    report.corner_modes_used = rebuilt.provenance.corner_modes_used
    report.warnings.extend(rebuilt.provenance.warnings)
    return finish(rebuilt.ring)
