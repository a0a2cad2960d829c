"""Command-line tools: import data, score detectors, localize sightings, route, serve.

Exit codes: 0 success, 2 input/parse errors, 3 no path between endpoints.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .cameras import load_registry, read_registry, write_registry
from .config import AppConfig, load_config
from .evaluation import (
    evaluate,
    fuse,
    load_coco_detections,
    load_coco_ground_truth,
    report_to_text,
    write_report,
)
from .exposure import ExposureParams, annotate_graph
from .geo import GeoPoint
from .localize import cluster, localize, read_observation_log, validate_registry
from .roadgraph import parse_graph_json, parse_osm_xml, read_graph, write_graph
from .routing import NoPath, RouteRequest, SnapFailure, route, route_to_geojson
from .server import ServiceState, serve_forever

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_PATH = 3

# every malformed-input failure mode: our parse errors are ValueError
# subclasses, file problems are OSError
_INPUT_ERRORS = (ValueError, OSError)


def _parse_latlon(raw: str) -> GeoPoint:
    lat, lon = raw.split(",")
    return GeoPoint(float(lat), float(lon))


def _load_state(config: AppConfig):
    cameras = read_registry(config.registry_path)
    graph = read_graph(config.graph_path)
    exposure = annotate_graph(graph, cameras, ExposureParams(config.sample_interval_m))
    return cameras, graph, exposure


def cmd_import_cameras(config: AppConfig, args) -> int:
    cameras = load_registry(Path(args.path).read_text(encoding="utf-8"))
    write_registry(cameras, config.registry_path)
    directed = sum(1 for c in cameras if c.kind == "directed")
    print(f"{len(cameras)} cameras ({directed} directed, {len(cameras) - directed} round)")
    return EXIT_OK


def cmd_import_graph(config: AppConfig, args) -> int:
    raw = Path(args.path).read_bytes()
    fmt = args.format
    if fmt == "auto":
        suffix = Path(args.path).suffix.lower()
        if suffix in (".osm", ".xml"):
            fmt = "osm"
        elif suffix == ".json":
            fmt = "json"
        else:
            fmt = "osm" if raw.lstrip().startswith(b"<") else "json"
    graph = parse_osm_xml(raw) if fmt == "osm" else parse_graph_json(raw)
    write_graph(graph, config.graph_path)
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges")
    return EXIT_OK


def cmd_route(config: AppConfig, args) -> int:
    cameras, graph, exposure = _load_state(config)
    req = RouteRequest(
        origin=_parse_latlon(args.origin),
        destination=_parse_latlon(args.destination),
        mode=args.mode,
        lambda_=config.lambda_ if args.lambda_ is None else args.lambda_,
        beta=config.beta if args.beta is None else args.beta,
        camera_penalty_m=config.camera_penalty_m if args.penalty is None else args.penalty,
    )
    found, report = route(graph, exposure, req)
    print(f"total_m {found.total_m:.3f}")
    print(f"exposed_m {report.exposed_m:.3f}")
    print(f"distinct_cameras {report.distinct_cameras}")
    print(f"detour_ratio {report.detour_ratio:.4f}")
    if args.geojson:
        doc = route_to_geojson(found, report, req)
        Path(args.geojson).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_eval(config: AppConfig, args) -> int:
    gts = load_coco_ground_truth(Path(args.gt))
    dets = load_coco_detections(Path(args.dets))
    if args.dets2:
        dets2 = load_coco_detections(Path(args.dets2))
        if args.fuse:
            dets = fuse(dets, dets2)
        else:
            dets = dets + dets2
    report = evaluate(dets, gts)
    print(report_to_text(report))
    if args.out:
        write_report(report, args.out)
    return EXIT_OK


def _next_localized_seq(existing_ids) -> int:
    seq = 0
    for camera_id in existing_ids:
        if camera_id.startswith("localized-"):
            tail = camera_id.rsplit("-", 1)[-1]
            if tail.isdigit():
                seq = max(seq, int(tail))
    return seq


def cmd_localize(config: AppConfig, args) -> int:
    observations = read_observation_log(args.obs)
    estimates = [localize(o) for o in observations]
    registry = read_registry(config.registry_path) if config.registry_path.exists() else []
    start = _next_localized_seq(c.id for c in registry)
    new_cams = cluster(estimates, eps_m=config.cluster_eps_m)
    renumbered = [
        replace(cam, id=f"localized-{i}")
        for i, cam in enumerate(new_cams, start=start + 1)
    ]
    registry.extend(renumbered)
    write_registry(registry, config.registry_path)
    print(f"added {len(renumbered)} cameras (registry now {len(registry)})")
    return EXIT_OK


def cmd_validate(config: AppConfig, args) -> int:
    observations = read_observation_log(args.obs)
    estimates = [localize(o) for o in observations]
    registry = read_registry(config.registry_path)
    radius = config.validate_radius_m if args.radius is None else args.radius
    report = validate_registry(registry, estimates, radius_m=radius)
    for check in report.checks:
        nearest = "-" if check.nearest_estimate_m is None else f"{check.nearest_estimate_m:.2f}"
        print(f"{check.camera_id} {check.status} {nearest}")
    print(f"confirmed {report.confirmed}")
    print(f"unconfirmed {report.unconfirmed}")
    print(f"novel {len(report.novel)}")
    return EXIT_OK


def cmd_serve(config: AppConfig, args) -> int:
    state = ServiceState(config)
    port = config.listen_port if args.port is None else args.port
    print(f"listening on 127.0.0.1:{port}", flush=True)
    serve_forever(state, port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cctvaware",
        description="CCTV coverage mapping, detector scoring, and privacy/safety routing",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--registry", help="camera registry GeoJSON path")
    parser.add_argument("--graph", help="road graph path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import-cameras", help="validate and persist a camera registry")
    p.add_argument("path")
    p.set_defaults(func=cmd_import_cameras)

    p = sub.add_parser("import-graph", help="parse and persist a road graph")
    p.add_argument("path")
    p.add_argument("--format", choices=("auto", "json", "osm"), default="auto")
    p.set_defaults(func=cmd_import_graph)

    p = sub.add_parser("route", help="compute a route and its exposure report")
    p.add_argument("--from", dest="origin", required=True, metavar="LAT,LON")
    p.add_argument("--to", dest="destination", required=True, metavar="LAT,LON")
    p.add_argument("--mode", choices=("default", "privacy", "safety"), default="default")
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--penalty", type=float, default=None)
    p.add_argument("--geojson", help="write the route as a GeoJSON feature")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("eval", help="score detections against COCO ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--dets", required=True)
    p.add_argument("--dets2")
    p.add_argument("--fuse", action="store_true")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("localize", help="turn an observation log into registry cameras")
    p.add_argument("--obs", required=True)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("validate", help="check a registry against an observation log")
    p.add_argument("--obs", required=True)
    p.add_argument("--radius", type=float, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(
            flags={"registry_path": args.registry, "graph_path": args.graph},
            config_path=args.config,
        )
        return args.func(config, args)
    except (NoPath, SnapFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
