import json
import logging

import numpy as np
import pytest
import shapely

from footreg.errors import IoError, ParseError, UnsupportedGeometry
from footreg.geometry import Orientation, Ring
from footreg.io import FeatureRecord, Format, corpus_records, read_features, write_features
from footreg.synth import SHAPES, make_corpus


def square_feature(coords, props=None, fid="a"):
    return {"type": "Feature", "id": fid, "properties": props,
            "geometry": {"type": "Polygon", "coordinates": [coords]}}


def write_json(tmp_path, doc, name="in.geojson"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def max_drift(a, b):
    assert [r.id for r in a] == [r.id for r in b]
    worst = 0.0
    for ra, rb in zip(a, b):
        for x, y in zip(ra.rings(), rb.rings()):
            worst = max(worst, float(np.abs(x.array - y.array).max()))
    return worst


def test_format_from_path():
    assert Format.from_path("a.geojson") is Format.GEOJSON
    assert Format.from_path("a.JSON") is Format.GEOJSON
    assert Format.from_path("a.wkt") is Format.WKT
    assert Format.from_path("a.csv") is Format.CSV
    assert Format.coerce("wkt", "x.geojson") is Format.WKT
    with pytest.raises(ValueError):
        Format.from_path("a.shp")


def test_closed_geojson_ring_becomes_open_ccw(tmp_path):
    cw = [[0, 0], [0, 3], [4, 3], [4, 0], [0, 0]]
    path = write_json(tmp_path, {"type": "FeatureCollection", "features": [square_feature(cw)]})
    (rec,) = read_features(path)
    assert len(rec.exterior) == 4
    assert rec.exterior.orientation is Orientation.CCW
    assert rec.id == "a"


def test_wkt_rectangle_area(tmp_path):
    path = tmp_path / "in.wkt"
    path.write_text("POLYGON ((0 0, 4 0, 4 3, 0 3, 0 0))\n")
    (rec,) = read_features(path)
    assert rec.exterior.area == pytest.approx(12.0)
    assert rec.id == "0"


def test_csv_matches_wkt(tmp_path):
    wkt = tmp_path / "in.wkt"
    wkt.write_text("POLYGON ((0 0, 4 0, 4 3, 0 3, 0 0))\nPOLYGON ((10 10, 12 10, 11 12, 10 10))\n")
    csv = tmp_path / "in.csv"
    csv.write_text("x,y\n# a comment\n0,0\n4,0\n4,3\n0,3\n0,0\n\n10,10\n12,10\n11,12\n10,10\n")
    a, b = read_features(wkt), read_features(csv)
    assert [r.id for r in a] == [r.id for r in b] == ["0", "1"]
    assert max_drift(a, b) == 0.0


def test_csv_feature_comment_names_ring(tmp_path):
    csv = tmp_path / "in.csv"
    csv.write_text("x,y\n# feature north\n0,0\n4,0\n4,3\n# feature south\n0,-5\n4,-5\n2,-2\n")
    assert [r.id for r in read_features(csv)] == ["north", "south"]


def test_multipolygon_parts_get_suffixes(tmp_path):
    geom = {"type": "MultiPolygon", "coordinates": [
        [[[0, 0], [1, 0], [1, 1], [0, 0]]],
        [[[5, 5], [6, 5], [6, 6], [5, 5]]],
    ]}
    path = write_json(tmp_path, {"type": "Feature", "id": "m", "properties": {"k": 1}, "geometry": geom})
    recs = read_features(path)
    assert [r.id for r in recs] == ["m#0", "m#1"]
    assert all(r.properties == {"k": 1} for r in recs)

    wkt = tmp_path / "m.wkt"
    wkt.write_text("m\tMULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)), ((5 5, 6 5, 6 6, 5 5)))\t\n")
    assert [r.id for r in read_features(wkt)] == ["m#0", "m#1"]


def test_holes_are_clockwise(tmp_path):
    ext = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]
    hole_ccw = [[2, 2], [4, 2], [4, 4], [2, 4], [2, 2]]
    doc = {"type": "Feature", "id": "h", "properties": None,
           "geometry": {"type": "Polygon", "coordinates": [ext, hole_ccw]}}
    (rec,) = read_features(write_json(tmp_path, doc))
    assert rec.holes[0].orientation is Orientation.CW
    # Shapely agrees on the oriented areas.
    out = tmp_path / "out.wkt"
    write_features([rec], out)
    poly = shapely.from_wkt(out.read_text().split("\t")[1])
    assert poly.area == pytest.approx(100 - 4)
    assert not poly.interiors[0].is_ccw and poly.exterior.is_ccw


def test_bare_geometry_document(tmp_path):
    doc = {"type": "Polygon", "coordinates": [[[0, 0], [2, 0], [0, 2], [0, 0]]]}
    (rec,) = read_features(write_json(tmp_path, doc))
    assert rec.exterior.area == pytest.approx(2.0)


def test_empty_collection_round_trip(tmp_path):
    out = tmp_path / "empty.geojson"
    write_features([], out)
    doc = json.loads(out.read_text())
    assert doc == {"type": "FeatureCollection", "features": []}
    assert read_features(out) == []


def test_nested_properties_survive_byte_for_byte(tmp_path):
    props = {"name": "Gebäude 7", "levels": [1, 2, {"roof": None}], "ratio": 0.1 + 0.2, "ok": True}
    rec = FeatureRecord("p", Ring([(0, 0), (1, 0), (1, 1)]), (), props)
    for name in ("p.geojson", "p.wkt"):
        path = tmp_path / name
        write_features([rec], path)
        (back,) = read_features(path)
        assert json.dumps(back.properties) == json.dumps(props)


def test_parse_error_location(tmp_path):
    path = tmp_path / "bad.geojson"
    path.write_text('{"type": "FeatureCollection",\n "features": [,]}')
    with pytest.raises(ParseError) as info:
        read_features(path)
    assert info.value.line == 2
    assert info.value.position == len('{"type": "FeatureCollection",\n "features": [')
    assert "line 2" in str(info.value)


def test_wkt_parse_error_points_at_line(tmp_path):
    path = tmp_path / "bad.wkt"
    path.write_text("POLYGON ((0 0, 1 0, 1 1, 0 0))\nPOLYGON ((0 0, 1\n")
    with pytest.raises(ParseError) as info:
        read_features(path)
    assert info.value.line == 2
    assert info.value.position == len("POLYGON ((0 0, 1 0, 1 1, 0 0))\n")


def test_csv_parse_error(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n0,0\n1,zero\n")
    with pytest.raises(ParseError) as info:
        read_features(path)
    assert info.value.line == 3


def test_degenerate_ring_is_a_parse_error(tmp_path):
    doc = {"type": "Polygon", "coordinates": [[[0, 0], [1, 1], [0, 0]]]}
    with pytest.raises(ParseError):
        read_features(write_json(tmp_path, doc))


def test_unsupported_geometry(tmp_path, caplog):
    doc = {"type": "FeatureCollection", "features": [
        {"type": "Feature", "id": "pt", "properties": None, "geometry": {"type": "Point", "coordinates": [0, 0]}},
        square_feature([[0, 0], [1, 0], [1, 1], [0, 0]], fid="ok"),
    ]}
    path = write_json(tmp_path, doc)
    with pytest.raises(UnsupportedGeometry):
        read_features(path)
    with caplog.at_level(logging.WARNING, logger="footreg.io"):
        recs = read_features(path, skip_unsupported=True)
    assert [r.id for r in recs] == ["ok"]
    assert "Point" in caplog.text


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        read_features(tmp_path / "nope.geojson")


def test_coordinates_rounded_to_nine_decimals(tmp_path):
    rec = FeatureRecord("r", Ring([(0.1234567891234, 0), (1, 0), (1, 1)]))
    out = tmp_path / "r.wkt"
    write_features([rec], out)
    assert "0.123456789 0" in out.read_text()


@pytest.mark.parametrize("fmt", ["geojson", "wkt"])
@pytest.mark.parametrize("shape", SHAPES)
def test_corpus_round_trip(tmp_path, fmt, shape):
    cases = make_corpus(10, 17, shape=shape, burr_count=(0, 8))
    records = corpus_records(cases)
    first = tmp_path / f"a.{fmt}"
    write_features(records, first)
    back = read_features(first)
    assert max_drift(records, back) < 1e-9
    assert [json.dumps(r.properties) for r in back] == [json.dumps(r.properties) for r in records]
    # A second pass is a fixed point of the text.
    second = tmp_path / f"b.{fmt}"
    write_features(back, second)
    assert second.read_bytes() == first.read_bytes()


def test_csv_drops_holes_with_warning(tmp_path, caplog):
    rec = FeatureRecord("h", Ring([(0, 0), (10, 0), (10, 10), (0, 10)]), (Ring([(2, 2), (2, 4), (4, 4)]),))
    with caplog.at_level(logging.WARNING, logger="footreg.io"):
        write_features([rec], tmp_path / "h.csv")
    assert "hole" in caplog.text
    (back,) = read_features(tmp_path / "h.csv")
    assert back.holes == () and back.id == "h"
