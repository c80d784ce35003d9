"""Matplotlib figures for the report path: per-feature overlays and a batch summary."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .geometry import Point, Ring  # noqa: E402

DPI = 120


def _closed_xy(ring: Ring):
    xs = [p.x for p in ring.vertices] + [ring.vertices[0].x]
    ys = [p.y for p in ring.vertices] + [ring.vertices[0].y]
    return xs, ys


def plot_overlay(before: Sequence[Ring], after: Sequence[Ring], spikes: Sequence[Point], path, title=None) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    for k, ring in enumerate(before):
        ax.plot(*_closed_xy(ring), color="0.6", lw=0.8, label="input" if k == 0 else None)
    for k, ring in enumerate(after):
        xs, ys = _closed_xy(ring)
        ax.plot(xs, ys, color="tab:blue", lw=1.8, label="regularized" if k == 0 else None)
        ax.plot(xs[:-1], ys[:-1], "o", color="tab:blue", ms=3)
    if spikes:
        ax.plot([p.x for p in spikes], [p.y for p in spikes], "x", color="tab:red", ms=6, label="removed spike")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    _save(fig, path)


def plot_batch_summary(rows: Sequence[dict], path) -> None:
    """Two panels: vertex count in vs out, and the distribution of max deviation."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    vin = [r["input_vertices"] for r in rows]
    vout = [r["output_vertices"] for r in rows]
    left.scatter(vin, vout, s=10, color="tab:blue")
    left.set_xlabel("input vertices")
    left.set_ylabel("output vertices")
    left.set_title("vertex reduction")
    dev = [r["max_deviation"] for r in rows]
    right.hist(dev, bins=max(5, min(40, len(dev) // 3 or 1)), color="tab:orange", edgecolor="white")
    right.set_xlabel("max deviation (m)")
    right.set_ylabel("features")
    right.set_title("input vertex to output boundary")
    fig.tight_layout()
    _save(fig, path)


def _save(fig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    # Fixed metadata keeps the PNG bytes stable across runs.
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
