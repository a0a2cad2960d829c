"""Project camera coverage onto graph edges as per-edge exposure fractions.

Edges are sampled along their polylines; a sample counts as exposed when any
camera zone covers it with a lateral buffer of half the street width. The
fraction of exposed samples approximates the covered share of the edge and
feeds the routing cost shaping.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from .cameras import Camera, coverage_zone, covers
from .geo import GeoPoint, haversine_m
from .roadgraph import Edge, RoadGraph

DEFAULT_SAMPLE_INTERVAL_M = 1.0
MAX_SAMPLE_INTERVAL_M = 5.0

# Conservative slack when prefiltering candidate cameras via the planar
# index; covers() makes the final call so over-inclusion is harmless.
_PRUNE_SLACK_M = 10.0


@dataclass(frozen=True)
class EdgeExposure:
    edge_id: str
    fraction: float
    camera_ids: frozenset[str]
    exposed_m: float


@dataclass(frozen=True)
class ExposureParams:
    sample_interval_m: float = DEFAULT_SAMPLE_INTERVAL_M

    def __post_init__(self) -> None:
        if not 0.0 < self.sample_interval_m <= MAX_SAMPLE_INTERVAL_M:
            raise ValueError(
                f"sample_interval_m {self.sample_interval_m} outside (0, {MAX_SAMPLE_INTERVAL_M}]"
            )


class ExposureMap:
    """Frozen per-edge exposure lookup covering every edge of its graph."""

    def __init__(self, per_edge: dict[str, EdgeExposure], params: ExposureParams):
        self.per_edge = MappingProxyType(dict(per_edge))
        self.params = params

    def __getitem__(self, edge_id: str) -> EdgeExposure:
        return self.per_edge[edge_id]

    def __contains__(self, edge_id: str) -> bool:
        return edge_id in self.per_edge

    def __len__(self) -> int:
        return len(self.per_edge)


def _sample_points(edge: Edge, interval_m: float) -> list[GeoPoint]:
    """Evenly spaced points along the polyline, endpoints included, spacing
    at most interval_m."""
    pts = edge.geometry
    seg_lens = [haversine_m(a, b) for a, b in zip(pts, pts[1:])]
    total = sum(seg_lens)
    if total == 0.0:
        return [pts[0]]
    n = max(1, math.ceil(total / interval_m))
    samples = []
    seg_idx = 0
    consumed = 0.0
    for i in range(n + 1):
        target = total * i / n
        while seg_idx < len(seg_lens) - 1 and consumed + seg_lens[seg_idx] < target:
            consumed += seg_lens[seg_idx]
            seg_idx += 1
        seg_len = seg_lens[seg_idx]
        t = 0.0 if seg_len == 0.0 else (target - consumed) / seg_len
        t = min(1.0, max(0.0, t))
        a, b = pts[seg_idx], pts[seg_idx + 1]
        samples.append(
            GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon))
        )
    return samples


def edge_exposure(
    edge: Edge,
    cameras: list[Camera],
    sample_interval_m: float = DEFAULT_SAMPLE_INTERVAL_M,
) -> EdgeExposure:
    """Sampled exposure of one edge against the given cameras."""
    ExposureParams(sample_interval_m)  # validate the interval
    zones = [(camera.id, coverage_zone(camera)) for camera in cameras]
    buffer_m = edge.width_m / 2.0
    samples = _sample_points(edge, sample_interval_m)
    exposed = 0
    seen: set[str] = set()
    for p in samples:
        hit = False
        for camera_id, zone in zones:
            if covers(zone, p, buffer_m):
                seen.add(camera_id)
                hit = True
        if hit:
            exposed += 1
    fraction = exposed / len(samples)
    return EdgeExposure(
        edge_id=edge.id,
        fraction=fraction,
        camera_ids=frozenset(seen),
        exposed_m=fraction * edge.length_m,
    )


def annotate_graph(
    graph: RoadGraph,
    cameras: list[Camera],
    params: ExposureParams | None = None,
) -> ExposureMap:
    """Exposure for every edge, with index-pruned candidate cameras.

    Each camera is offered only to edges passing within range + max street
    half-width (+ slack); the per-sample covers() test is unchanged, so the
    result equals the all-pairs computation exactly.
    """
    params = params or ExposureParams()
    candidates: dict[str, list[Camera]] = {edge_id: [] for edge_id in graph.edges}
    if cameras and graph.edges:
        max_buffer = max(e.width_m for e in graph.edges.values()) / 2.0
        for camera in cameras:
            radius = camera.range_m + max_buffer + _PRUNE_SLACK_M
            for edge_id in graph.edges_near(camera.position, radius):
                candidates[edge_id].append(camera)
    per_edge = {
        edge_id: edge_exposure(graph.edges[edge_id], candidates[edge_id], params.sample_interval_m)
        for edge_id in graph.edges
    }
    return ExposureMap(per_edge, params)


def write_exposure_csv(exposure_map: ExposureMap, path: str | Path) -> None:
    """Tabular debug export: edge_id, fraction, exposed_m, camera_ids."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["edge_id", "fraction", "exposed_m", "camera_ids"])
    for edge_id in sorted(exposure_map.per_edge):
        e = exposure_map.per_edge[edge_id]
        writer.writerow([e.edge_id, f"{e.fraction:.6f}", f"{e.exposed_m:.3f}",
                         ";".join(sorted(e.camera_ids))])
    Path(path).write_text(out.getvalue(), encoding="utf-8")
