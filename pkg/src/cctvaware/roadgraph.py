"""Walkable road networks: native JSON and OSM XML ingestion, spatial queries.

The graph is immutable after parsing. A uniform 50 m grid over edge segments
backs nearest-edge snapping and radius queries; all planar math runs in one
equirectangular frame anchored at the graph's bounding-box center so that
index and brute-force scans are comparable bit for bit.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .geo import EARTH_RADIUS_M, GeoPoint, haversine_m

GRAPH_SCHEMA_VERSION = "cctv-graph/1"
DEFAULT_WIDTH_M = 8.0
GRID_CELL_M = 50.0

# oneway only restricts pedestrians on motor roads; everything else is
# walkable in both directions regardless of the tag
ONEWAY_HIGHWAYS = {"motorway", "trunk"}

_ENDPOINT_TOL_DEG = 1e-7
_LENGTH_TOL = 0.01  # declared edge length may deviate 1% from its polyline


class ParseError(ValueError):
    pass


class DanglingReference(ParseError):
    pass


class NonPositiveLength(ParseError):
    pass


class UnknownNodeRef(ParseError):
    pass


class EmptyGraph(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    position: GeoPoint


@dataclass(frozen=True)
class Edge:
    id: str
    from_node: str
    to_node: str
    length_m: float | None = None  # filled from the polyline when omitted
    width_m: float = DEFAULT_WIDTH_M
    oneway: bool = False
    geometry: tuple[GeoPoint, ...] = ()


def polyline_length_m(points) -> float:
    return sum(haversine_m(a, b) for a, b in zip(points, points[1:]))


class LocalFrame:
    """Meters-east/meters-north conversion shared by index and callers."""

    def __init__(self, ref: GeoPoint):
        self.ref = ref
        self._m_per_deg_lat = EARTH_RADIUS_M * math.pi / 180.0
        self._m_per_deg_lon = self._m_per_deg_lat * math.cos(math.radians(ref.lat))

    def to_xy(self, p: GeoPoint) -> tuple[float, float]:
        return (
            (p.lon - self.ref.lon) * self._m_per_deg_lon,
            (p.lat - self.ref.lat) * self._m_per_deg_lat,
        )


@dataclass(frozen=True)
class Segment:
    edge_id: str
    seg_index: int
    a: GeoPoint
    b: GeoPoint
    start_offset_m: float
    length_m: float


@dataclass(frozen=True)
class SnapResult:
    edge_id: str
    offset_m: float
    snapped: GeoPoint
    distance_m: float


def segment_projection(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> tuple[float, float]:
    """(distance, t) of the closest point on segment ab to p, planar meters."""
    dx, dy = bx - ax, by - ay
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / norm2
        t = max(0.0, min(1.0, t))
    cx, cy = ax + t * dx, ay + t * dy
    return math.hypot(px - cx, py - cy), t


class _SegmentGrid:
    def __init__(self, frame: LocalFrame, segments: list[Segment], cell_m: float = GRID_CELL_M):
        self.frame = frame
        self.cell_m = cell_m
        self.segments = segments
        self.seg_xy = []
        self.cells: dict[tuple[int, int], list[int]] = {}
        for idx, seg in enumerate(segments):
            ax, ay = frame.to_xy(seg.a)
            bx, by = frame.to_xy(seg.b)
            self.seg_xy.append((ax, ay, bx, by))
            for cx in range(self._cell_of(min(ax, bx)), self._cell_of(max(ax, bx)) + 1):
                for cy in range(self._cell_of(min(ay, by)), self._cell_of(max(ay, by)) + 1):
                    self.cells.setdefault((cx, cy), []).append(idx)
        if self.cells:
            xs = [c[0] for c in self.cells]
            ys = [c[1] for c in self.cells]
            self.bounds = (min(xs), max(xs), min(ys), max(ys))
        else:
            self.bounds = None

    def _cell_of(self, v: float) -> int:
        return math.floor(v / self.cell_m)

    def _candidates_in_ring(self, cx: int, cy: int, k: int):
        if k == 0:
            yield from self.cells.get((cx, cy), ())
            return
        for dx in range(-k, k + 1):
            for dy in (-k, k):
                yield from self.cells.get((cx + dx, cy + dy), ())
        for dy in range(-k + 1, k):
            for dx in (-k, k):
                yield from self.cells.get((cx + dx, cy + dy), ())

    def _inside_bounds(self, cx: int, cy: int) -> bool:
        x0, x1, y0, y1 = self.bounds
        return x0 <= cx <= x1 and y0 <= cy <= y1

    def nearest(self, p: GeoPoint) -> tuple[float, int, float]:
        """(distance, segment index, t) minimizing (distance, edge_id, seg_index)."""
        px, py = self.frame.to_xy(p)
        cx, cy = self._cell_of(px), self._cell_of(py)
        if self.bounds is None:
            raise EmptyGraph("no segments to snap to")
        if not self._inside_bounds(cx, cy):
            # query far outside the indexed area: plain scan
            return self._scan(px, py, range(len(self.segments)))
        x0, x1, y0, y1 = self.bounds
        max_ring = max(cx - x0, x1 - cx, cy - y0, y1 - cy)
        best = None
        seen: set[int] = set()
        for k in range(max_ring + 1):
            if best is not None and (k - 1) * self.cell_m > best[0]:
                break
            fresh = [i for i in self._candidates_in_ring(cx, cy, k) if i not in seen]
            seen.update(fresh)
            if fresh:
                candidate = self._scan(px, py, fresh)
                if best is None or self._key(candidate) < self._key(best):
                    best = candidate
        if best is None:
            return self._scan(px, py, range(len(self.segments)))
        return best

    def _key(self, entry):
        dist, idx, t = entry
        seg = self.segments[idx]
        return (dist, seg.edge_id, seg.seg_index, t)

    def _scan(self, px: float, py: float, indices) -> tuple[float, int, float]:
        best = None
        for i in indices:
            ax, ay, bx, by = self.seg_xy[i]
            dist, t = segment_projection(px, py, ax, ay, bx, by)
            entry = (dist, i, t)
            if best is None or self._key(entry) < self._key(best):
                best = entry
        if best is None:
            raise EmptyGraph("no segments to snap to")
        return best

    def near(self, p: GeoPoint, radius_m: float):
        """Segment indices from all cells within radius (conservative superset)."""
        if self.bounds is None:
            return
        px, py = self.frame.to_xy(p)
        cx, cy = self._cell_of(px), self._cell_of(py)
        reach = math.ceil(radius_m / self.cell_m) + 1
        x0, x1, y0, y1 = self.bounds
        seen: set[int] = set()
        for gx in range(max(cx - reach, x0), min(cx + reach, x1) + 1):
            for gy in range(max(cy - reach, y0), min(cy + reach, y1) + 1):
                for idx in self.cells.get((gx, gy), ()):
                    if idx not in seen:
                        seen.add(idx)
                        yield idx


class RoadGraph:
    """Immutable walkable network with adjacency and a segment grid index."""

    def __init__(self, nodes: list[Node], edges: list[Edge]):
        self.nodes: dict[str, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise ParseError(f"duplicate node id {node.id!r}")
            self.nodes[node.id] = node

        self.edges: dict[str, Edge] = {}
        for edge in edges:
            if edge.id in self.edges:
                raise ParseError(f"duplicate edge id {edge.id!r}")
            self.edges[edge.id] = self._normalize(edge)

        self._adjacency: dict[str, list[tuple[str, str, bool]]] = {
            node_id: [] for node_id in self.nodes
        }
        for edge in self.edges.values():
            self._adjacency[edge.from_node].append((edge.id, edge.to_node, True))
            if not edge.oneway:
                self._adjacency[edge.to_node].append((edge.id, edge.from_node, False))
        for entries in self._adjacency.values():
            entries.sort()

        self.frame = LocalFrame(self._bbox_center())
        self._segments: list[Segment] = []
        for edge_id in sorted(self.edges):
            edge = self.edges[edge_id]
            offset = 0.0
            for i, (a, b) in enumerate(zip(edge.geometry, edge.geometry[1:])):
                seg_len = haversine_m(a, b)
                self._segments.append(Segment(edge_id, i, a, b, offset, seg_len))
                offset += seg_len
        self._grid = _SegmentGrid(self.frame, self._segments)

    def _normalize(self, edge: Edge) -> Edge:
        if edge.from_node not in self.nodes:
            raise DanglingReference(f"edge {edge.id!r}: unknown node {edge.from_node!r}")
        if edge.to_node not in self.nodes:
            raise DanglingReference(f"edge {edge.id!r}: unknown node {edge.to_node!r}")
        if edge.width_m <= 0:
            raise ParseError(f"edge {edge.id!r}: width_m must be positive")
        geometry = edge.geometry or (
            self.nodes[edge.from_node].position,
            self.nodes[edge.to_node].position,
        )
        if len(geometry) < 2:
            raise ParseError(f"edge {edge.id!r}: geometry needs at least 2 points")
        for end, node_id in ((geometry[0], edge.from_node), (geometry[-1], edge.to_node)):
            if not end.almost_equals(self.nodes[node_id].position, _ENDPOINT_TOL_DEG):
                raise ParseError(
                    f"edge {edge.id!r}: geometry endpoint does not match node {node_id!r}"
                )
        computed = polyline_length_m(geometry)
        length = edge.length_m if edge.length_m is not None else computed
        if length <= 0:
            raise NonPositiveLength(f"edge {edge.id!r}: length {length} must be positive")
        if computed > 0 and abs(length - computed) / computed > _LENGTH_TOL:
            raise ParseError(
                f"edge {edge.id!r}: declared length {length:.2f} deviates more than "
                f"{_LENGTH_TOL:.0%} from polyline length {computed:.2f}"
            )
        return Edge(
            id=edge.id,
            from_node=edge.from_node,
            to_node=edge.to_node,
            length_m=length,
            width_m=edge.width_m,
            oneway=edge.oneway,
            geometry=tuple(geometry),
        )

    def _bbox_center(self) -> GeoPoint:
        if not self.nodes:
            return GeoPoint(0.0, 0.0)
        lats = [n.position.lat for n in self.nodes.values()]
        lons = [n.position.lon for n in self.nodes.values()]
        return GeoPoint((min(lats) + max(lats)) / 2.0, (min(lons) + max(lons)) / 2.0)

    def arcs_from(self, node_id: str) -> list[tuple[str, str, bool]]:
        """Outgoing (edge_id, neighbor, forward) arcs."""
        return self._adjacency[node_id]

    def arc_count(self) -> int:
        return sum(len(v) for v in self._adjacency.values())

    def segments(self) -> list[Segment]:
        return list(self._segments)

    def snap(self, p: GeoPoint) -> SnapResult:
        """Closest point on any edge polyline; ties go to the smallest edge id."""
        if not self.edges:
            raise EmptyGraph("cannot snap onto an empty graph")
        dist, idx, t = self._grid.nearest(p)
        seg = self._segments[idx]
        snapped = GeoPoint(
            seg.a.lat + t * (seg.b.lat - seg.a.lat),
            seg.a.lon + t * (seg.b.lon - seg.a.lon),
        )
        return SnapResult(
            edge_id=seg.edge_id,
            offset_m=seg.start_offset_m + t * seg.length_m,
            snapped=snapped,
            distance_m=dist,
        )

    def edges_near(self, p: GeoPoint, radius_m: float) -> set[str]:
        """Ids of edges that may pass within radius of p (superset)."""
        return {self._segments[i].edge_id for i in self._grid.near(p, radius_m)}


# --- native format ---------------------------------------------------------------

def parse_graph_json(data: bytes | str | dict) -> RoadGraph:
    if isinstance(data, (bytes, str)):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    if doc.get("version") != GRAPH_SCHEMA_VERSION:
        raise ParseError(f"version: expected {GRAPH_SCHEMA_VERSION!r}, got {doc.get('version')!r}")

    nodes = []
    for i, raw in enumerate(doc.get("nodes", [])):
        where = f"nodes[{i}]"
        try:
            nodes.append(Node(str(raw["id"]), GeoPoint(float(raw["lat"]), float(raw["lon"]))))
        except KeyError as exc:
            raise ParseError(f"{where}: missing {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from exc

    edges = []
    for i, raw in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        try:
            geometry = tuple(
                GeoPoint(float(lat), float(lon)) for lat, lon in raw.get("geometry", [])
            )
            edges.append(
                Edge(
                    id=str(raw["id"]),
                    from_node=str(raw["from"]),
                    to_node=str(raw["to"]),
                    length_m=raw.get("length_m"),
                    width_m=float(raw.get("width_m", DEFAULT_WIDTH_M)),
                    oneway=bool(raw.get("oneway", False)),
                    geometry=geometry,
                )
            )
        except KeyError as exc:
            raise ParseError(f"{where}: missing {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from exc
    return RoadGraph(nodes, edges)


def serialize_graph(graph: RoadGraph) -> dict:
    return {
        "version": GRAPH_SCHEMA_VERSION,
        "nodes": [
            {"id": n.id, "lat": n.position.lat, "lon": n.position.lon}
            for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {
                "id": e.id,
                "from": e.from_node,
                "to": e.to_node,
                "length_m": e.length_m,
                "width_m": e.width_m,
                "oneway": e.oneway,
                "geometry": [[p.lat, p.lon] for p in e.geometry],
            }
            for e in sorted(graph.edges.values(), key=lambda e: e.id)
        ],
    }


def read_graph(path: str | Path) -> RoadGraph:
    return parse_graph_json(Path(path).read_text(encoding="utf-8"))


def write_graph(graph: RoadGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(serialize_graph(graph), indent=1) + "\n", encoding="utf-8")


# --- OSM XML subset -----------------------------------------------------------------

def parse_osm_xml(data: bytes | str) -> RoadGraph:
    """Build a walkable graph from OSM nodes and highway-tagged ways.

    Consecutive node refs of a way become one edge each; width comes from
    the way's width tag when it parses as meters; oneway only sticks on
    motorway/trunk ways (pedestrian model). Everything else is ignored.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ParseError(f"invalid OSM XML: {exc}") from exc

    positions: dict[str, GeoPoint] = {}
    for el in root.iter("node"):
        try:
            positions[el.attrib["id"]] = GeoPoint(
                float(el.attrib["lat"]), float(el.attrib["lon"])
            )
        except KeyError as exc:
            raise ParseError(f"node: missing attribute {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise ParseError(f"node {el.attrib.get('id')!r}: {exc}") from exc

    used_nodes: dict[str, Node] = {}
    edges: list[Edge] = []
    for way in root.iter("way"):
        way_id = way.attrib.get("id", "?")
        tags = {t.attrib.get("k"): t.attrib.get("v") for t in way.findall("tag")}
        if "highway" not in tags:
            continue
        refs = [nd.attrib["ref"] for nd in way.findall("nd")]
        for ref in refs:
            if ref not in positions:
                raise UnknownNodeRef(f"way {way_id}: unknown node ref {ref!r}")
            used_nodes.setdefault(ref, Node(ref, positions[ref]))
        width = DEFAULT_WIDTH_M
        if "width" in tags:
            try:
                width = float(tags["width"])
            except ValueError:
                pass  # units or junk in the tag: keep the default
        oneway = tags.get("oneway") == "yes" and tags["highway"] in ONEWAY_HIGHWAYS
        seq = 0
        for a, b in zip(refs, refs[1:]):
            if a == b:
                continue
            edges.append(
                Edge(
                    id=f"w{way_id}.{seq}",
                    from_node=a,
                    to_node=b,
                    length_m=None,
                    width_m=width,
                    oneway=oneway,
                )
            )
            seq += 1
    return RoadGraph(list(used_nodes.values()), edges)
