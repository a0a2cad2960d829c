"""HTTP JSON API over the registry, graph, and router.

One writer at a time mutates the registry behind a lock and swaps in a fresh
read snapshot (graph + exposure map); readers serve from whatever snapshot
they grabbed, so routing never blocks on writes.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .cameras import (
    Camera,
    InvalidCamera,
    camera_to_feature,
    coverage_zone,
    feature_to_camera,
    read_registry,
    write_registry,
    zone_polygon,
)
from .config import AppConfig
from .exposure import ExposureMap, ExposureParams, annotate_graph
from .geo import GeoPoint
from .roadgraph import RoadGraph, read_graph
from .routing import NoPath, RouteRequest, SnapFailure, route
from . import __version__


@dataclass(frozen=True)
class Snapshot:
    cameras: tuple[Camera, ...]
    graph: RoadGraph
    exposure: ExposureMap


class ServiceState:
    """Shared registry/graph with atomic snapshot swaps after writes."""

    def __init__(self, config: AppConfig):
        self.config = config
        self._write_lock = threading.Lock()
        cameras = tuple(read_registry(config.registry_path))
        graph = read_graph(config.graph_path)
        self._snapshot = self._build(cameras, graph)

    def _build(self, cameras: tuple[Camera, ...], graph: RoadGraph) -> Snapshot:
        exposure = annotate_graph(
            graph, list(cameras), ExposureParams(self.config.sample_interval_m)
        )
        return Snapshot(cameras, graph, exposure)

    def snapshot(self) -> Snapshot:
        return self._snapshot

    def add_camera(self, feature: dict) -> Camera:
        camera = feature_to_camera(feature)
        with self._write_lock:
            snap = self._snapshot
            if any(c.id == camera.id for c in snap.cameras):
                raise InvalidCamera(f"id: {camera.id!r} already registered")
            cameras = snap.cameras + (camera,)
            write_registry(list(cameras), self.config.registry_path)
            self._snapshot = self._build(cameras, snap.graph)
        return camera

    def cameras_geojson(self, arc_step_deg: float = 10.0) -> dict:
        features = []
        for camera in self.snapshot().cameras:
            feature = camera_to_feature(camera)
            ring = zone_polygon(coverage_zone(camera), arc_step_deg)
            feature["properties"]["zone_polygon"] = [[p.lon, p.lat] for p in ring]
            features.append(feature)
        return {"type": "FeatureCollection", "features": features}


class BadRequest(ValueError):
    pass


def _parse_latlon(raw: str, name: str) -> GeoPoint:
    parts = raw.split(",")
    if len(parts) != 2:
        raise BadRequest(f"{name}: expected 'lat,lon'")
    try:
        return GeoPoint(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise BadRequest(f"{name}: {exc}") from exc


def build_route_request(query: dict[str, str], config: AppConfig) -> RouteRequest:
    if "from" not in query:
        raise BadRequest("from: missing")
    if "to" not in query:
        raise BadRequest("to: missing")

    def number(name: str, default: float) -> float:
        if name not in query:
            return default
        try:
            return float(query[name])
        except ValueError as exc:
            raise BadRequest(f"{name}: {exc}") from exc

    try:
        return RouteRequest(
            origin=_parse_latlon(query["from"], "from"),
            destination=_parse_latlon(query["to"], "to"),
            mode=query.get("mode", "default"),
            lambda_=number("lambda", config.lambda_),
            beta=number("beta", config.beta),
            camera_penalty_m=number("penalty", config.camera_penalty_m),
        )
    except ValueError as exc:
        raise BadRequest(str(exc)) from exc


def run_route_query(snapshot: Snapshot, req: RouteRequest) -> dict:
    found, report = route(snapshot.graph, snapshot.exposure, req)
    return {
        "route": {
            "type": "LineString",
            "coordinates": [[p.lon, p.lat] for p in found.geometry],
        },
        "report": {
            "distinct_cameras": report.distinct_cameras,
            "exposed_m": report.exposed_m,
            "total_m": report.total_m,
            "exposure_share": report.exposure_share,
            "detour_ratio": report.detour_ratio,
        },
        "mode": req.mode,
        "params": {
            "lambda": req.lambda_,
            "beta": req.beta,
            "camera_penalty_m": req.camera_penalty_m,
        },
    }


class _Handler(BaseHTTPRequestHandler):
    server_version = f"cctvaware/{__version__}"
    state: ServiceState  # injected by make_server

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _send(self, status: int, payload, content_type="application/json"):
        body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self._send(204, b"", content_type="text/plain")

    def do_GET(self):
        try:
            url = urlparse(self.path)
            if url.path == "/health":
                self._send(200, b"ok", content_type="text/plain")
            elif url.path == "/cameras":
                self._send(200, self.state.cameras_geojson())
            elif url.path == "/route":
                query = {k: v[-1] for k, v in parse_qs(url.query).items()}
                req = build_route_request(query, self.state.config)
                self._send(200, run_route_query(self.state.snapshot(), req))
            else:
                self._send(404, {"error": f"unknown path {url.path}"})
        except BadRequest as exc:
            self._send(400, {"error": str(exc)})
        except (NoPath, SnapFailure) as exc:
            self._send(422, {"error": str(exc)})
        except Exception:  # never leak a traceback to clients
            self._send(500, {"error": "internal error"})

    def do_POST(self):
        try:
            url = urlparse(self.path)
            if url.path != "/cameras":
                self._send(404, {"error": f"unknown path {url.path}"})
                return
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                feature = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise BadRequest(f"body: invalid JSON ({exc})") from exc
            if not isinstance(feature, dict):
                raise BadRequest("body: expected a GeoJSON Feature object")
            try:
                camera = self.state.add_camera(feature)
            except InvalidCamera as exc:
                raise BadRequest(str(exc)) from exc
            self._send(201, camera_to_feature(camera))
        except BadRequest as exc:
            self._send(400, {"error": str(exc)})
        except Exception:
            self._send(500, {"error": "internal error"})


def make_server(state: ServiceState, port: int | None = None) -> ThreadingHTTPServer:
    """Bind the API server; port 0 picks an ephemeral port."""
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer(("127.0.0.1", state.config.listen_port if port is None else port),
                               handler)


def serve_forever(state: ServiceState, port: int | None = None) -> None:
    server = make_server(state, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
