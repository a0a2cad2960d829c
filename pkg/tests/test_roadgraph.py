import json
import math
import random

import pytest

from cctvaware.geo import GeoPoint, haversine_m
from cctvaware.roadgraph import (
    DanglingReference,
    EmptyGraph,
    Node,
    NonPositiveLength,
    ParseError,
    RoadGraph,
    UnknownNodeRef,
    parse_graph_json,
    parse_osm_xml,
    polyline_length_m,
    serialize_graph,
)

LAT0, LON0 = 60.17, 24.94
M_PER_DEG_LAT = 111194.92664455874


def offset_deg(north_m, east_m, lat0=LAT0):
    return (
        north_m / M_PER_DEG_LAT,
        east_m / (M_PER_DEG_LAT * math.cos(math.radians(lat0))),
    )


def grid_point(north_m, east_m):
    dlat, dlon = offset_deg(north_m, east_m)
    return GeoPoint(LAT0 + dlat, LON0 + dlon)


def native_doc(nodes, edges):
    return {
        "version": "cctv-graph/1",
        "nodes": [{"id": nid, "lat": p.lat, "lon": p.lon} for nid, p in nodes],
        "edges": edges,
    }


def triangle_doc():
    a, b, c = grid_point(0, 0), grid_point(0, 150), grid_point(120, 75)
    return native_doc(
        [("a", a), ("b", b), ("c", c)],
        [
            {"id": "e1", "from": "a", "to": "b"},
            {"id": "e2", "from": "b", "to": "c"},
            {"id": "e3", "from": "c", "to": "a"},
        ],
    )


# --- native parsing -----------------------------------------------------------

def test_parse_computes_missing_length():
    a, b = grid_point(0, 0), grid_point(0, 100)
    doc = native_doc([("a", a), ("b", b)], [{"id": "e1", "from": "a", "to": "b"}])
    g = parse_graph_json(json.dumps(doc))
    assert g.edges["e1"].length_m == pytest.approx(haversine_m(a, b))
    assert g.edges["e1"].width_m == 8.0
    assert g.edges["e1"].geometry == (a, b)


def test_parse_dangling_reference():
    doc = native_doc([("a", grid_point(0, 0))], [{"id": "e1", "from": "a", "to": "zz"}])
    with pytest.raises(DanglingReference, match="zz"):
        parse_graph_json(json.dumps(doc))


def test_parse_triangle_arcs():
    g = parse_graph_json(json.dumps(triangle_doc()))
    assert len(g.nodes) == 3
    assert len(g.edges) == 3
    assert g.arc_count() == 6


def test_parse_rejects_bad_version():
    with pytest.raises(ParseError, match="version"):
        parse_graph_json(json.dumps({"version": "nope", "nodes": [], "edges": []}))


def test_parse_error_cites_position():
    doc = triangle_doc()
    del doc["edges"][1]["to"]
    with pytest.raises(ParseError, match=r"edges\[1\]"):
        parse_graph_json(json.dumps(doc))
    with pytest.raises(ParseError, match="line"):
        parse_graph_json("{not json")


def test_parse_rejects_nonpositive_length():
    a, b = grid_point(0, 0), grid_point(0, 100)
    doc = native_doc(
        [("a", a), ("b", b)],
        [{"id": "e1", "from": "a", "to": "b", "length_m": -5.0}],
    )
    with pytest.raises(NonPositiveLength):
        parse_graph_json(json.dumps(doc))


def test_parse_rejects_length_far_from_polyline():
    a, b = grid_point(0, 0), grid_point(0, 100)
    doc = native_doc(
        [("a", a), ("b", b)],
        [{"id": "e1", "from": "a", "to": "b", "length_m": 150.0}],
    )
    with pytest.raises(ParseError, match="deviates"):
        parse_graph_json(json.dumps(doc))


def test_declared_length_within_tolerance_kept():
    a, b = grid_point(0, 0), grid_point(0, 100)
    true_len = haversine_m(a, b)
    doc = native_doc(
        [("a", a), ("b", b)],
        [{"id": "e1", "from": "a", "to": "b", "length_m": true_len * 1.005}],
    )
    g = parse_graph_json(json.dumps(doc))
    assert g.edges["e1"].length_m == true_len * 1.005


def test_oneway_appears_once_in_adjacency():
    a, b = grid_point(0, 0), grid_point(0, 100)
    doc = native_doc(
        [("a", a), ("b", b)],
        [{"id": "e1", "from": "a", "to": "b", "oneway": True}],
    )
    g = parse_graph_json(json.dumps(doc))
    assert g.arcs_from("a") == [("e1", "b", True)]
    assert g.arcs_from("b") == []


def test_geometry_polyline_and_endpoint_check():
    a, b = grid_point(0, 0), grid_point(0, 100)
    mid = grid_point(20, 50)
    doc = native_doc(
        [("a", a), ("b", b)],
        [{
            "id": "e1", "from": "a", "to": "b",
            "geometry": [[a.lat, a.lon], [mid.lat, mid.lon], [b.lat, b.lon]],
        }],
    )
    g = parse_graph_json(json.dumps(doc))
    assert g.edges["e1"].length_m == pytest.approx(polyline_length_m([a, mid, b]))
    doc["edges"][0]["geometry"][0] = [a.lat + 0.001, a.lon]
    with pytest.raises(ParseError, match="endpoint"):
        parse_graph_json(json.dumps(doc))


def test_serialize_roundtrip_isomorphic():
    g1 = parse_graph_json(json.dumps(triangle_doc()))
    g2 = parse_graph_json(json.dumps(serialize_graph(g1)))
    assert g1.nodes == g2.nodes
    assert g1.edges == g2.edges


# --- OSM parsing ------------------------------------------------------------------

def osm_xml(nodes, ways):
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6">']
    for nid, p in nodes:
        parts.append(f'  <node id="{nid}" lat="{p.lat!r}" lon="{p.lon!r}"/>')
    for wid, refs, tags in ways:
        parts.append(f'  <way id="{wid}">')
        for r in refs:
            parts.append(f'    <nd ref="{r}"/>')
        for k, v in tags.items():
            parts.append(f'    <tag k="{k}" v="{v}"/>')
        parts.append("  </way>")
    parts.append("</osm>")
    return "\n".join(parts)


def test_osm_way_over_three_nodes():
    nodes = [("1", grid_point(0, 0)), ("2", grid_point(0, 100)), ("3", grid_point(0, 200))]
    xml = osm_xml(nodes, [("10", ["1", "2", "3"], {"highway": "residential"})])
    g = parse_osm_xml(xml)
    assert len(g.edges) == 2
    assert len(g.nodes) == 3
    assert g.arc_count() == 4


def test_osm_way_without_highway_ignored():
    nodes = [("1", grid_point(0, 0)), ("2", grid_point(0, 100))]
    xml = osm_xml(nodes, [("10", ["1", "2"], {"building": "yes"})])
    g = parse_osm_xml(xml)
    assert len(g.edges) == 0


def test_osm_unknown_node_ref():
    nodes = [("1", grid_point(0, 0))]
    xml = osm_xml(nodes, [("10", ["1", "99"], {"highway": "path"})])
    with pytest.raises(UnknownNodeRef, match="99"):
        parse_osm_xml(xml)


def test_osm_oneway_pedestrian_rules():
    nodes = [("1", grid_point(0, 0)), ("2", grid_point(0, 100))]
    residential = osm_xml(nodes, [("10", ["1", "2"], {"highway": "residential", "oneway": "yes"})])
    assert parse_osm_xml(residential).edges["w10.0"].oneway is False
    motorway = osm_xml(nodes, [("10", ["1", "2"], {"highway": "motorway", "oneway": "yes"})])
    assert parse_osm_xml(motorway).edges["w10.0"].oneway is True


def test_osm_width_tag_and_junk_width():
    nodes = [("1", grid_point(0, 0)), ("2", grid_point(0, 100))]
    tagged = osm_xml(nodes, [("10", ["1", "2"], {"highway": "path", "width": "6.5"})])
    assert parse_osm_xml(tagged).edges["w10.0"].width_m == 6.5
    junk = osm_xml(nodes, [("10", ["1", "2"], {"highway": "path", "width": "about 4m"})])
    assert parse_osm_xml(junk).edges["w10.0"].width_m == 8.0


def test_osm_bad_xml():
    with pytest.raises(ParseError):
        parse_osm_xml("<osm><node id=")


def _ten_way_fixture():
    """The same small network described both ways: (nodes, native edges, osm ways)."""
    coords = {}
    for r in range(4):
        for c in range(4):
            coords[f"{r}{c}"] = grid_point(r * 90.0, c * 110.0)
    ways = []
    for r in range(4):  # 4 horizontal ways across each row
        ways.append((f"h{r}", [f"{r}0", f"{r}1", f"{r}2", f"{r}3"], {"highway": "residential"}))
    for c in range(4):  # 4 vertical ways
        ways.append((f"v{c}", [f"0{c}", f"1{c}", f"2{c}", f"3{c}"], {"highway": "footway"}))
    ways.append(("d1", ["00", "11"], {"highway": "path", "width": "3"}))
    ways.append(("d2", ["22", "33"], {"highway": "trunk", "oneway": "yes"}))
    native_edges = []
    for wid, refs, tags in ways:
        width = float(tags["width"]) if "width" in tags else 8.0
        oneway = tags.get("oneway") == "yes" and tags["highway"] in ("motorway", "trunk")
        for i, (a, b) in enumerate(zip(refs, refs[1:])):
            native_edges.append({
                "id": f"w{wid}.{i}", "from": a, "to": b,
                "width_m": width, "oneway": oneway,
            })
    nodes = sorted(coords.items())
    return nodes, native_edges, ways


def edge_signature(graph):
    return sorted(
        (e.from_node, e.to_node, round(e.length_m, 6), e.width_m, e.oneway)
        for e in graph.edges.values()
    )


def test_osm_fixture_equals_native_twin():
    nodes, native_edges, ways = _ten_way_fixture()
    g_native = parse_graph_json(json.dumps(native_doc(nodes, native_edges)))
    g_osm = parse_osm_xml(osm_xml(nodes, ways))
    assert set(g_native.nodes) == set(g_osm.nodes)
    for nid in g_native.nodes:
        assert g_native.nodes[nid].position == g_osm.nodes[nid].position
    assert edge_signature(g_native) == edge_signature(g_osm)
    assert g_native.arc_count() == g_osm.arc_count()


# --- snapping ------------------------------------------------------------------------

def test_snap_empty_graph():
    g = RoadGraph([Node("a", grid_point(0, 0))], [])
    with pytest.raises(EmptyGraph):
        g.snap(grid_point(0, 0))


def test_snap_on_node_gives_incident_edge():
    g = parse_graph_json(json.dumps(triangle_doc()))
    node = g.nodes["b"]
    snap = g.snap(node.position)
    assert snap.distance_m < 1e-9
    edge = g.edges[snap.edge_id]
    assert node.id in (edge.from_node, edge.to_node)
    assert snap.offset_m < 1e-6 or abs(snap.offset_m - edge.length_m) < 1e-6
    assert snap.snapped.almost_equals(node.position, 1e-9)


def test_snap_tie_at_shared_node_prefers_smallest_edge_id():
    # node "a" belongs to e1 (a->b) and e3 (c->a); both are at distance 0
    g = parse_graph_json(json.dumps(triangle_doc()))
    snap = g.snap(g.nodes["a"].position)
    assert snap.edge_id == "e1"


def test_snap_perpendicular_from_midpoint():
    a, b = grid_point(0, 0), grid_point(0, 200)
    doc = native_doc([("a", a), ("b", b)], [{"id": "e1", "from": "a", "to": "b"}])
    g = parse_graph_json(json.dumps(doc))
    mid = grid_point(0, 100)
    p = grid_point(5, 100)  # 5 m north of the midpoint
    snap = g.snap(p)
    assert snap.edge_id == "e1"
    assert snap.distance_m == pytest.approx(5.0, abs=0.01)
    assert haversine_m(snap.snapped, mid) < 0.05
    assert snap.offset_m == pytest.approx(g.edges["e1"].length_m / 2.0, abs=0.05)


def _scan_snap(graph, p):
    """Linear-scan oracle with the same planar metric and tie-break key."""
    px, py = graph.frame.to_xy(p)
    best = None
    for seg in graph.segments():
        ax, ay = graph.frame.to_xy(seg.a)
        bx, by = graph.frame.to_xy(seg.b)
        dx, dy = bx - ax, by - ay
        norm2 = dx * dx + dy * dy
        t = 0.0 if norm2 == 0.0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / norm2))
        dist = math.hypot(px - (ax + t * dx), py - (ay + t * dy))
        key = (dist, seg.edge_id, seg.seg_index, t)
        if best is None or key < best[0]:
            best = (key, seg)
    key, seg = best
    return seg.edge_id, seg.start_offset_m + key[3] * seg.length_m, key[0]


def test_snap_matches_linear_scan_oracle():
    nodes, native_edges, _ = _ten_way_fixture()
    g = parse_graph_json(json.dumps(native_doc(nodes, native_edges)))
    rng = random.Random(53)
    for _ in range(300):
        p = grid_point(rng.uniform(-80, 380), rng.uniform(-80, 420))
        snap = g.snap(p)
        edge_id, offset, dist = _scan_snap(g, p)
        assert snap.edge_id == edge_id
        assert snap.offset_m == offset
        assert snap.distance_m == dist


def test_snap_far_query_still_matches_scan():
    g = parse_graph_json(json.dumps(triangle_doc()))
    p = GeoPoint(LAT0 + 0.03, LON0 - 0.03)  # kilometers away from the triangle
    snap = g.snap(p)
    edge_id, offset, dist = _scan_snap(g, p)
    assert (snap.edge_id, snap.offset_m, snap.distance_m) == (edge_id, offset, dist)


def test_snap_distance_bounded_by_vertex_distances():
    g = parse_graph_json(json.dumps(triangle_doc()))
    rng = random.Random(59)
    for _ in range(100):
        p = grid_point(rng.uniform(-50, 200), rng.uniform(-50, 200))
        snap = g.snap(p)
        px, py = g.frame.to_xy(p)
        for seg in g.segments():
            for v in (seg.a, seg.b):
                vx, vy = g.frame.to_xy(v)
                assert snap.distance_m <= math.hypot(px - vx, py - vy) + 1e-9


def test_edges_near_is_superset_of_truth():
    nodes, native_edges, _ = _ten_way_fixture()
    g = parse_graph_json(json.dumps(native_doc(nodes, native_edges)))
    rng = random.Random(61)
    for _ in range(100):
        p = grid_point(rng.uniform(0, 300), rng.uniform(0, 350))
        radius = rng.uniform(5, 120)
        near = g.edges_near(p, radius)
        px, py = g.frame.to_xy(p)
        for seg in g.segments():
            ax, ay = g.frame.to_xy(seg.a)
            bx, by = g.frame.to_xy(seg.b)
            dx, dy = bx - ax, by - ay
            norm2 = dx * dx + dy * dy
            t = 0.0 if norm2 == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / norm2))
            dist = math.hypot(px - (ax + t * dx), py - (ay + t * dy))
            if dist <= radius:
                assert seg.edge_id in near
