"""Shared fixture builders for CLI, HTTP, and acceptance tests."""

from __future__ import annotations

import json
import math

LAT0, LON0 = 60.17, 24.94
M_PER_DEG_LAT = 111194.92664455874


def grid_latlon(north_m: float, east_m: float) -> tuple[float, float]:
    return (
        LAT0 + north_m / M_PER_DEG_LAT,
        LON0 + east_m / (M_PER_DEG_LAT * math.cos(math.radians(LAT0))),
    )


def corridor_graph_doc() -> dict:
    """5x5 grid of 100 m blocks: nodes n<row><col>, edges h/v<row><col>."""
    nodes = []
    edges = []
    for r in range(5):
        for c in range(5):
            lat, lon = grid_latlon(r * 100.0, c * 100.0)
            nodes.append({"id": f"n{r}{c}", "lat": lat, "lon": lon})
    for r in range(5):
        for c in range(5):
            if c < 4:
                edges.append({"id": f"h{r}{c}", "from": f"n{r}{c}", "to": f"n{r}{c+1}"})
            if r < 4:
                edges.append({"id": f"v{r}{c}", "from": f"n{r}{c}", "to": f"n{r+1}{c}"})
    return {"version": "cctv-graph/1", "nodes": nodes, "edges": edges}


def corridor_registry_doc() -> dict:
    """Round cameras covering the middle row of the corridor graph, plus one
    directed camera off to the side."""
    features = []
    for c in range(4):
        lat, lon = grid_latlon(200.0, c * 100.0 + 50.0)
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [lon, lat]},
            "properties": {"id": f"cam{c}", "kind": "round", "range_m": 20.0,
                           "source": "registry", "confidence": 1.0},
        })
    lat, lon = grid_latlon(395.0, 5.0)
    features.append({
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [lon, lat]},
        "properties": {"id": "cam-directed", "kind": "directed", "heading_deg": 135.0,
                       "fov_deg": 90.0, "range_m": 30.0,
                       "source": "registry", "confidence": 0.9},
    })
    return {"type": "FeatureCollection", "features": features}


def node_latlon(row: int, col: int) -> str:
    lat, lon = grid_latlon(row * 100.0, col * 100.0)
    return f"{lat},{lon}"


def coco_box(i: int) -> list[float]:
    return [10.0 + i, 20.0, 40.0, 40.0]  # medium bucket, one box per image


def coco_ground_truth_doc(n: int = 39) -> dict:
    return {
        "images": [{"id": i} for i in range(1, n + 1)],
        "annotations": [
            {"image_id": i, "category_id": 1 + (i % 2), "bbox": coco_box(i)}
            for i in range(1, n + 1)
        ],
        "categories": [{"id": 1, "name": "directed"}, {"id": 2, "name": "round"}],
    }


def coco_detections_doc(image_ids, score: float) -> list:
    return [
        {"image_id": i, "category_id": 1 + (i % 2), "bbox": coco_box(i), "score": score}
        for i in image_ids
    ]


def observation_log(rows) -> str:
    lines = ["cctv-obs/1"]
    for ts, lat, lon, gps, heading, rng, rsig, kind, score, ref in rows:
        lines.append(f"{ts},{lat},{lon},{gps},{heading},{rng},{rsig},{kind},{score},{ref}")
    return "\n".join(lines) + "\n"


def write_corridor_files(tmp_path):
    tmp_path.mkdir(parents=True, exist_ok=True)
    registry = tmp_path / "registry.geojson"
    graph = tmp_path / "graph.json"
    registry.write_text(json.dumps(corridor_registry_doc(), indent=2) + "\n")
    graph.write_text(json.dumps(corridor_graph_doc(), indent=2) + "\n")
    return registry, graph
