"""Default, privacy-first, and safety-first routing over an exposure-annotated graph.

All three modes run one nonnegative-weight label-settling shortest-path
search; they differ only in how exposure shapes the edge cost. Privacy
inflates covered meters and charges a flat penalty per camera on an edge;
safety discounts covered meters (floored to keep costs positive).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .exposure import EdgeExposure, ExposureMap
from .geo import GeoPoint, haversine_m
from .roadgraph import Edge, EmptyGraph, RoadGraph

MODES = ("default", "privacy", "safety")

# Offsets closer than this to an edge end snap to the node itself.
_NODE_SNAP_EPS_M = 1e-6

_ORIGIN = ("virtual", "origin")
_DEST = ("virtual", "destination")


class NoPath(ValueError):
    pass


class SnapFailure(ValueError):
    pass


@dataclass(frozen=True)
class RouteRequest:
    origin: GeoPoint
    destination: GeoPoint
    mode: str = "default"
    lambda_: float = 10.0
    beta: float = 0.7
    camera_penalty_m: float = 50.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.lambda_ < 0:
            raise ValueError(f"lambda: {self.lambda_} must be >= 0")
        if not 0.0 <= self.beta <= 0.9:
            raise ValueError(f"beta: {self.beta} outside [0, 0.9]")
        if self.camera_penalty_m < 0:
            raise ValueError(f"camera_penalty_m: {self.camera_penalty_m} must be >= 0")


@dataclass(frozen=True)
class RouteStep:
    edge_id: str
    forward: bool
    start_offset_m: float  # along-edge offsets, start < end except zero-length
    end_offset_m: float

    @property
    def length_m(self) -> float:
        return self.end_offset_m - self.start_offset_m


@dataclass(frozen=True)
class Route:
    steps: tuple[RouteStep, ...]
    geometry: tuple[GeoPoint, ...]
    total_m: float
    total_cost: float


@dataclass(frozen=True)
class ExposureReport:
    distinct_cameras: int
    exposed_m: float
    total_m: float
    exposure_share: float
    detour_ratio: float | None


def edge_cost(edge: Edge, exposure: EdgeExposure, mode: str, params: RouteRequest) -> float:
    """Meter-equivalent traversal cost of a full edge under the given mode."""
    length = edge.length_m
    if mode == "default":
        return length
    if mode == "privacy":
        return (
            length * (1.0 + params.lambda_ * exposure.fraction)
            + params.camera_penalty_m * len(exposure.camera_ids)
        )
    if mode == "safety":
        return max(length * (1.0 - params.beta * exposure.fraction), 0.05 * length)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class _Anchor:
    node_id: str | None  # anchored to a node, or
    edge_id: str | None  # interior of an edge at offset_m
    offset_m: float      # in edge.length_m units
    point: GeoPoint


def _resolve_anchor(graph: RoadGraph, p: GeoPoint) -> _Anchor:
    try:
        snap = graph.snap(p)
    except EmptyGraph as exc:
        raise SnapFailure(str(exc)) from exc
    edge = graph.edges[snap.edge_id]
    # snap offsets run along the polyline; rescale into declared-length units
    polyline_len = _cumulative_lengths(edge.geometry)[-1]
    offset = snap.offset_m * (edge.length_m / polyline_len) if polyline_len > 0 else 0.0
    if offset <= _NODE_SNAP_EPS_M:
        node = graph.nodes[edge.from_node]
        return _Anchor(edge.from_node, None, 0.0, node.position)
    if offset >= edge.length_m - _NODE_SNAP_EPS_M:
        node = graph.nodes[edge.to_node]
        return _Anchor(edge.to_node, None, edge.length_m, node.position)
    return _Anchor(None, snap.edge_id, offset, snap.snapped)


def _cumulative_lengths(points: tuple[GeoPoint, ...]) -> list[float]:
    acc = [0.0]
    for a, b in zip(points, points[1:]):
        acc.append(acc[-1] + haversine_m(a, b))
    return acc


def _point_at(points, cum, offset: float) -> GeoPoint:
    if offset <= 0.0:
        return points[0]
    if offset >= cum[-1]:
        return points[-1]
    for i in range(len(cum) - 1):
        if cum[i + 1] >= offset:
            seg = cum[i + 1] - cum[i]
            t = 0.0 if seg == 0.0 else (offset - cum[i]) / seg
            a, b = points[i], points[i + 1]
            return GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon))
    return points[-1]


def _slice_polyline(edge: Edge, start: float, end: float, forward: bool) -> list[GeoPoint]:
    """Edge geometry between the along-edge offsets, oriented by direction."""
    points = edge.geometry
    cum = _cumulative_lengths(points)
    scale = edge.length_m / cum[-1] if cum[-1] > 0 else 1.0
    lo, hi = start / scale, end / scale  # offsets live in length_m units
    out = [_point_at(points, cum, lo)]
    for i in range(len(points)):
        if lo < cum[i] < hi:
            out.append(points[i])
    tail = _point_at(points, cum, hi)
    if tail != out[-1]:
        out.append(tail)
    if not forward:
        out.reverse()
    return out


def _search(
    graph: RoadGraph,
    exposure_map: ExposureMap,
    origin: _Anchor,
    dest: _Anchor,
    mode: str,
    params: RouteRequest,
):
    """Dijkstra over graph arcs plus the virtual anchor arcs.

    Returns (total_cost, steps). Steps carry along-edge offsets so partial
    first/last edges prorate cleanly.
    """

    def full_cost(edge_id: str) -> float:
        return edge_cost(graph.edges[edge_id], exposure_map[edge_id], mode, params)

    def prorated(edge_id: str, part_len: float) -> float:
        edge = graph.edges[edge_id]
        if edge.length_m == 0.0:
            return 0.0
        return full_cost(edge_id) * (part_len / edge.length_m)

    same_spot = (
        origin.node_id is not None
        and origin.node_id == dest.node_id
        or origin.node_id is None
        and dest.node_id is None
        and origin.edge_id == dest.edge_id
        and abs(origin.offset_m - dest.offset_m) <= _NODE_SNAP_EPS_M
    )
    if same_spot:
        return 0.0, []

    start_key = origin.node_id if origin.node_id is not None else _ORIGIN
    goal_key = dest.node_id if dest.node_id is not None else _DEST

    def arcs_from(u):
        out = []
        if u == _ORIGIN:
            edge = graph.edges[origin.edge_id]
            remainder = edge.length_m - origin.offset_m
            out.append((
                edge.to_node,
                prorated(edge.id, remainder),
                RouteStep(edge.id, True, origin.offset_m, edge.length_m),
            ))
            if not edge.oneway:
                out.append((
                    edge.from_node,
                    prorated(edge.id, origin.offset_m),
                    RouteStep(edge.id, False, 0.0, origin.offset_m),
                ))
            if dest.node_id is None and dest.edge_id == origin.edge_id:
                delta = dest.offset_m - origin.offset_m
                if delta >= 0:
                    out.append((
                        _DEST,
                        prorated(edge.id, delta),
                        RouteStep(edge.id, True, origin.offset_m, dest.offset_m),
                    ))
                elif not edge.oneway:
                    out.append((
                        _DEST,
                        prorated(edge.id, -delta),
                        RouteStep(edge.id, False, dest.offset_m, origin.offset_m),
                    ))
            return out
        for edge_id, neighbor, forward in graph.arcs_from(u):
            edge = graph.edges[edge_id]
            out.append((
                neighbor,
                full_cost(edge_id),
                RouteStep(edge_id, forward, 0.0, edge.length_m),
            ))
        if dest.node_id is None:
            edge = graph.edges[dest.edge_id]
            if u == edge.from_node:
                out.append((
                    _DEST,
                    prorated(edge.id, dest.offset_m),
                    RouteStep(edge.id, True, 0.0, dest.offset_m),
                ))
            if u == edge.to_node and not edge.oneway:
                out.append((
                    _DEST,
                    prorated(edge.id, edge.length_m - dest.offset_m),
                    RouteStep(edge.id, False, dest.offset_m, edge.length_m),
                ))
        return out

    dist = {start_key: 0.0}
    prev: dict = {}
    settled = set()
    counter = 0
    heap = [(0.0, counter, start_key)]
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u == goal_key:
            break
        for v, w, step in arcs_from(u):
            if v in settled:
                continue
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = (u, step)
                counter += 1
                heapq.heappush(heap, (nd, counter, v))

    if goal_key not in settled:
        raise NoPath("no path between the snapped endpoints")

    steps = []
    node = goal_key
    while node != start_key:
        node, step = prev[node]
        steps.append(step)
    steps.reverse()
    return dist[goal_key], steps


def _assemble_route(graph: RoadGraph, anchor_o: _Anchor,
                    cost: float, steps: list[RouteStep]) -> Route:
    geometry: list[GeoPoint] = []
    total = 0.0
    for step in steps:
        if step.length_m <= 0.0:
            continue
        total += step.length_m
        piece = _slice_polyline(graph.edges[step.edge_id], step.start_offset_m,
                                step.end_offset_m, step.forward)
        for p in piece:
            if geometry and geometry[-1].almost_equals(p, 1e-12):
                continue
            geometry.append(p)
    if not geometry:
        geometry = [anchor_o.point]
    return Route(tuple(steps), tuple(geometry), total, cost)


def route(
    graph: RoadGraph, exposure_map: ExposureMap, req: RouteRequest
) -> tuple[Route, ExposureReport]:
    """Minimum-cost route for the request plus its exposure statistics.

    detour_ratio compares the returned route's length against a default-mode
    run between the same snapped endpoints.
    """
    anchor_o = _resolve_anchor(graph, req.origin)
    anchor_d = _resolve_anchor(graph, req.destination)
    cost, steps = _search(graph, exposure_map, anchor_o, anchor_d, req.mode, req)
    found = _assemble_route(graph, anchor_o, cost, steps)
    if req.mode == "default":
        default_total = found.total_m
    else:
        d_cost, d_steps = _search(graph, exposure_map, anchor_o, anchor_d, "default", req)
        default_total = _assemble_route(graph, anchor_o, d_cost, d_steps).total_m
    report = exposure_report(found, exposure_map, default_total_m=default_total)
    return found, report


def exposure_report(
    route_: Route, exposure_map: ExposureMap, default_total_m: float | None = None
) -> ExposureReport:
    """Exposure statistics of a route: distinct cameras, exposed meters, detour."""
    cameras: set[str] = set()
    exposed = 0.0
    total = 0.0
    for step in route_.steps:
        if step.length_m <= 0.0:
            continue
        entry = exposure_map[step.edge_id]
        total += step.length_m
        exposed += entry.fraction * step.length_m
        cameras |= entry.camera_ids
    share = exposed / total if total > 0 else 0.0
    detour = None
    if default_total_m is not None:
        detour = route_.total_m / default_total_m if default_total_m > 0 else 1.0
    return ExposureReport(
        distinct_cameras=len(cameras),
        exposed_m=exposed,
        total_m=total,
        exposure_share=share,
        detour_ratio=detour,
    )


def route_to_geojson(route_: Route, report: ExposureReport, req: RouteRequest) -> dict:
    """GeoJSON Feature for the route line with the report as properties."""
    return {
        "type": "Feature",
        "geometry": {
            "type": "LineString",
            "coordinates": [[p.lon, p.lat] for p in route_.geometry],
        },
        "properties": {
            "mode": req.mode,
            "total_m": route_.total_m,
            "total_cost": route_.total_cost,
            "exposed_m": report.exposed_m,
            "exposure_share": report.exposure_share,
            "distinct_cameras": report.distinct_cameras,
            "detour_ratio": report.detour_ratio,
        },
    }
