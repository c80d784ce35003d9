"""Before/after SVG overlays for visual checking of regularized footprints."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import quoteattr

from .errors import IoError
from .geometry import Point, Ring

MARGIN = 0.05
BEFORE_STROKE = "#9a9a9a"
AFTER_STROKE = "#1f4e9c"
SPIKE_FILL = "#d62728"


def _num(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path(ring: Ring) -> str:
    # SVG y grows downward; flip so north stays up.
    head, *rest = ring.vertices
    parts = [f"M{_num(head.x)},{_num(-head.y)}"]
    parts.extend(f"L{_num(p.x)},{_num(-p.y)}" for p in rest)
    return " ".join(parts) + " Z"


def svg_document(
    before: Sequence[Ring],
    after: Sequence[Ring],
    spikes: Sequence[Point] = (),
    title: str | None = None,
) -> str:
    """SVG text with ``before`` in gray, ``after`` solid and spike dots in red."""
    pts = [p for ring in (*before, *after) for p in ring.vertices] + list(spikes)
    if not pts:
        raise ValueError("nothing to draw")
    xs = [p.x for p in pts]
    ys = [-p.y for p in pts]
    w = max(max(xs) - min(xs), 1e-9)
    h = max(max(ys) - min(ys), 1e-9)
    pad = MARGIN * max(w, h)
    x0, y0 = min(xs) - pad, min(ys) - pad
    vw, vh = w + 2 * pad, h + 2 * pad
    stroke = max(vw, vh) / 400.0
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_num(x0)} {_num(y0)} {_num(vw)} {_num(vh)}" width="800" height="{_num(800 * vh / vw)}">',
    ]
    if title:
        lines.append(f"<title>{title.replace('&', '&amp;').replace('<', '&lt;')}</title>")
    lines.append(
        f'<g id="before" fill="none" stroke="{BEFORE_STROKE}" stroke-width="{_num(stroke)}" '
        'stroke-linejoin="round" fill-rule="evenodd">'
    )
    lines.extend(f"<path d={quoteattr(_path(r))}/>" for r in before)
    lines.append("</g>")
    lines.append(
        f'<g id="after" fill="none" stroke="{AFTER_STROKE}" stroke-width="{_num(2 * stroke)}" '
        'stroke-linejoin="miter" fill-rule="evenodd">'
    )
    lines.extend(f"<path d={quoteattr(_path(r))}/>" for r in after)
    lines.append("</g>")
    lines.append(f'<g id="spikes" fill="{SPIKE_FILL}" stroke="none">')
    lines.extend(
        f'<circle class="spike" cx="{_num(p.x)}" cy="{_num(-p.y)}" r="{_num(3 * stroke)}"/>' for p in spikes
    )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(before, after, path, *, after_holes=(), title: str | None = None) -> None:
    """Write the overlay of an input feature and its regularized exterior.

    ``before`` is a ``FeatureRecord`` (or a bare ``Ring``), ``after`` a
    ``RegularizedRing``; removed spike vertices come from its report.
    Regularized holes can be passed in ``after_holes``.
    """
    before_rings = before.rings() if hasattr(before, "rings") else [before]
    after_rings = [after.ring, *(h.ring for h in after_holes)]
    spikes = [
        v.position
        for rr in (after, *after_holes)
        for v in rr.provenance.spike_verdicts
        if v.removed and v.position is not None
    ]
    text = svg_document(before_rings, after_rings, spikes, title)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
