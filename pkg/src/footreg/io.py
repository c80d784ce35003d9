"""Reading and writing footprint features: GeoJSON, WKT lines and CSV-xy.

Rings are stored open (the closing vertex of a file ring is dropped on
ingest and restored on output), exteriors counter-clockwise and holes
clockwise. Feature properties are carried through untouched.

WKT files hold one feature per line, either a bare geometry or
``id<TAB>geometry<TAB>properties-json``. CSV-xy files hold one ``x,y`` pair
per row with a blank line between rings; a ``# feature <id>`` comment names
the ring that follows, other ``#`` lines are ignored.
"""

from __future__ import annotations

import enum
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import shapely.errors
import shapely.wkt

from .errors import FootregError, IoError, ParseError, UnsupportedGeometry
from .geometry import Orientation, Ring

log = logging.getLogger(__name__)

DECIMALS = 9


class Format(enum.Enum):
    GEOJSON = "geojson"
    WKT = "wkt"
    CSV = "csv"

    @classmethod
    def from_path(cls, path) -> "Format":
        suffix = Path(path).suffix.lower()
        if suffix in (".geojson", ".json"):
            return cls.GEOJSON
        if suffix == ".wkt":
            return cls.WKT
        if suffix in (".csv", ".xy"):
            return cls.CSV
        raise ValueError(f"cannot infer a format from {path!s}; pass one explicitly")

    @classmethod
    def coerce(cls, fmt, path=None) -> "Format":
        if fmt is None:
            return cls.from_path(path)
        return fmt if isinstance(fmt, cls) else cls(str(fmt).lower())


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    exterior: Ring
    holes: tuple[Ring, ...] = ()
    properties: dict | None = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "exterior", self.exterior.oriented(Orientation.CCW))
        object.__setattr__(self, "holes", tuple(h.oriented(Orientation.CW) for h in self.holes))

    def rings(self) -> list[Ring]:
        return [self.exterior, *self.holes]


def _open_ring(coords: Sequence[Sequence[float]], where: dict) -> Ring:
    pts = [(float(c[0]), float(c[1])) for c in coords]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    try:
        return Ring(pts)
    except (FootregError, ValueError, TypeError) as exc:
        raise ParseError(f"invalid ring: {exc}", **where) from exc


def _closed(ring: Ring) -> list[list[float]]:
    pts = [[round(p.x, DECIMALS), round(p.y, DECIMALS)] for p in ring.vertices]
    return pts + [pts[0]]


def _polygon_records(fid: str, geom: dict, props, where: dict) -> list[FeatureRecord]:
    kind = geom.get("type") if isinstance(geom, dict) else None
    try:
        coords = geom["coordinates"]
    except (KeyError, TypeError):
        coords = None
    if kind == "Polygon":
        parts = [coords]
    elif kind == "MultiPolygon":
        parts = coords
    else:
        raise UnsupportedGeometry(f"feature {fid}: unsupported geometry type {kind!r}")
    if not isinstance(parts, list) or not all(isinstance(p, list) and p for p in parts):
        raise ParseError(f"feature {fid}: malformed coordinates", **where)
    out = []
    for k, part in enumerate(parts):
        rings = [_open_ring(r, where) for r in part]
        pid = fid if kind == "Polygon" else f"{fid}#{k}"
        out.append(FeatureRecord(pid, rings[0], tuple(rings[1:]), props))
    return out


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _read_geojson(text: str, skip_unsupported: bool) -> list[FeatureRecord]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        byte = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, position=byte) from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level GeoJSON value must be an object", line=1, position=0)
    kind = doc.get("type")
    if kind == "FeatureCollection":
        features = doc.get("features")
        if not isinstance(features, list):
            raise ParseError("FeatureCollection without a features array", line=1, position=0)
    elif kind == "Feature":
        features = [doc]
    else:
        features = [{"type": "Feature", "geometry": doc, "properties": None}]

    # Rough locations so errors point near the offending feature.
    anchors, start = [], 0
    for _ in features:
        at = text.find('"Feature"', start)
        if at < 0:
            anchors.append({"line": None, "position": None})
            continue
        anchors.append({"line": _line_of(text, at), "position": len(text[:at].encode("utf-8"))})
        start = at + 1

    records: list[FeatureRecord] = []
    for k, feat in enumerate(features):
        where = anchors[k]
        if not isinstance(feat, dict):
            raise ParseError(f"feature {k} is not an object", **where)
        fid = feat.get("id")
        if fid is None:
            fid = str(k)
        try:
            records.extend(_polygon_records(str(fid), feat.get("geometry"), feat.get("properties"), where))
        except UnsupportedGeometry as exc:
            if not skip_unsupported:
                raise
            log.warning("skipping: %s", exc)
    return records


def _shapely_polygons(fid: str, geom, where: dict) -> list[tuple[str, object]]:
    if geom.geom_type == "Polygon":
        return [(fid, geom)]
    if geom.geom_type == "MultiPolygon":
        return [(f"{fid}#{k}", g) for k, g in enumerate(geom.geoms)]
    raise UnsupportedGeometry(f"feature {fid}: unsupported geometry type {geom.geom_type!r}")


def _read_wkt(text: str, skip_unsupported: bool) -> list[FeatureRecord]:
    records: list[FeatureRecord] = []
    offset = 0
    count = 0
    for lineno, raw in enumerate(text.splitlines(keepends=True), start=1):
        where = {"line": lineno, "position": offset}
        offset += len(raw.encode("utf-8"))
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = raw.rstrip("\r\n").split("\t")
        if len(fields) == 1:
            fid, wkt, props = str(count), fields[0], None
        elif len(fields) in (2, 3):
            fid, wkt = fields[0], fields[1]
            props = None
            if len(fields) == 3 and fields[2].strip():
                try:
                    props = json.loads(fields[2])
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid properties JSON: {exc.msg}", line=lineno,
                                     position=where["position"]) from exc
        else:
            raise ParseError("expected 1 to 3 tab-separated fields", **where)
        count += 1
        try:
            geom = shapely.wkt.loads(wkt)
        except shapely.errors.ShapelyError as exc:
            raise ParseError(f"invalid WKT: {exc}", **where) from exc
        try:
            parts = _shapely_polygons(fid, geom, where)
        except UnsupportedGeometry as exc:
            if not skip_unsupported:
                raise
            log.warning("skipping: %s", exc)
            continue
        for pid, poly in parts:
            ext = _open_ring(poly.exterior.coords, where)
            holes = tuple(_open_ring(h.coords, where) for h in poly.interiors)
            records.append(FeatureRecord(pid, ext, holes, props))
    return records


def _read_csv(text: str) -> list[FeatureRecord]:
    records: list[FeatureRecord] = []
    block: list[tuple[float, float]] = []
    block_where: dict = {}
    next_id: str | None = None
    offset = 0

    def flush():
        nonlocal block, next_id
        if block:
            fid = next_id if next_id is not None else str(len(records))
            records.append(FeatureRecord(fid, _open_ring(block, block_where)))
        block, next_id = [], None

    for lineno, raw in enumerate(text.splitlines(keepends=True), start=1):
        where = {"line": lineno, "position": offset}
        offset += len(raw.encode("utf-8"))
        line = raw.strip()
        if not line:
            flush()
            continue
        if line.startswith("#"):
            tag = line[1:].strip()
            if tag.startswith("feature "):
                flush()
                next_id = tag[len("feature "):].strip()
            continue
        if line.replace(" ", "").lower() == "x,y":
            continue
        parts = [s.strip() for s in line.split(",")]
        if len(parts) != 2:
            raise ParseError("expected an x,y pair", **where)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(f"not a number: {line!r}", **where) from exc
        if not block:
            block_where = where
        block.append((x, y))
    flush()
    return records


def read_features(path, fmt=None, *, skip_unsupported: bool = False) -> list[FeatureRecord]:
    """Load every polygon feature in ``path``.

    MultiPolygons are split into one record per part with ids ``id#0``,
    ``id#1`` and so on. Points and lines raise ``UnsupportedGeometry`` unless
    ``skip_unsupported`` is set, in which case they are logged and dropped.
    """
    fmt = Format.coerce(fmt, path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError("file is not valid UTF-8", position=exc.start) from exc
    if fmt is Format.GEOJSON:
        return _read_geojson(text, skip_unsupported)
    if fmt is Format.WKT:
        return _read_wkt(text, skip_unsupported)
    return _read_csv(text)


def _fmt(v: float) -> str:
    s = f"{round(v, DECIMALS):.{DECIMALS}f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def feature_dict(record: FeatureRecord) -> dict:
    return {
        "type": "Feature",
        "id": record.id,
        "properties": record.properties,
        "geometry": {"type": "Polygon", "coordinates": [_closed(r) for r in record.rings()]},
    }


def _geojson_text(features: Iterable[dict]) -> str:
    body = ",\n".join(json.dumps(f, ensure_ascii=False, allow_nan=False) for f in features)
    if not body:
        return '{"type": "FeatureCollection", "features": []}\n'
    return '{"type": "FeatureCollection", "features": [\n' + body + "\n]}\n"


def polygon_wkt(record: FeatureRecord) -> str:
    rings = []
    for ring in record.rings():
        pts = [*ring.vertices, ring.vertices[0]]
        rings.append("(" + ", ".join(f"{_fmt(p.x)} {_fmt(p.y)}" for p in pts) + ")")
    return "POLYGON (" + ", ".join(rings) + ")"


def _wkt_text(records: Sequence[FeatureRecord]) -> str:
    lines = []
    for r in records:
        if "\t" in r.id or "\n" in r.id:
            raise IoError(f"feature id {r.id!r} cannot be written to a WKT line file")
        props = "" if r.properties is None else json.dumps(r.properties, ensure_ascii=False)
        lines.append(f"{r.id}\t{polygon_wkt(r)}\t{props}\n")
    return "".join(lines)


def _csv_text(records: Sequence[FeatureRecord]) -> str:
    chunks = ["x,y\n"]
    for k, r in enumerate(records):
        if r.holes:
            log.warning("CSV-xy has no hole syntax; dropping %d hole(s) of feature %s", len(r.holes), r.id)
        if k:
            chunks.append("\n")
        chunks.append(f"# feature {r.id}\n")
        pts = [*r.exterior.vertices, r.exterior.vertices[0]]
        chunks.extend(f"{_fmt(p.x)},{_fmt(p.y)}\n" for p in pts)
    return "".join(chunks)


def _write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_features(records: Sequence[FeatureRecord], path, fmt=None) -> None:
    """Write records with coordinates rounded to 9 decimals and rings closed."""
    fmt = Format.coerce(fmt, path)
    if fmt is Format.GEOJSON:
        text = _geojson_text(feature_dict(r) for r in records)
    elif fmt is Format.WKT:
        text = _wkt_text(records)
    else:
        text = _csv_text(records)
    _write_text(path, text)


def corpus_records(cases) -> list[FeatureRecord]:
    """Clean and noisy ring of every synthetic case as tagged records."""
    out = []
    for k, case in enumerate(cases):
        spec = case.spec.to_dict()
        out.append(FeatureRecord(f"{k}/clean", case.clean, (), {"role": "clean", "burr_indices": [], "spec": spec}))
        out.append(
            FeatureRecord(
                f"{k}/noisy",
                case.noisy,
                (),
                {"role": "noisy", "burr_indices": list(case.burr_indices), "spec": spec},
            )
        )
    return out


def export_corpus(cases, path, fmt=None) -> None:
    write_features(corpus_records(cases), path, fmt)

