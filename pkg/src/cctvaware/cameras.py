"""Camera taxonomy and ground-plane coverage footprints.

Two camera classes are modeled: directed (box/bullet) cameras watching an
angular sector along their mounting heading, and round (dome/sphere) cameras
watching a full disc. Coverage is strictly 2-D; street width enters as a
lateral buffer when testing points against a zone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .geo import (
    GeoPoint,
    DegenerateInput,
    destination_point,
    haversine_m,
    initial_bearing_deg,
    wrap_angle_deg,
)

CAMERA_KINDS = ("directed", "round")
CAMERA_SOURCES = ("registry", "localized", "imported")

DEFAULT_DIRECTED_FOV_DEG = 90.0
DEFAULT_DIRECTED_RANGE_M = 30.0
DEFAULT_ROUND_RANGE_M = 15.0
MAX_RANGE_M = 200.0


class InvalidCamera(ValueError):
    """Camera violates a taxonomy invariant; the message names the field."""


@dataclass(frozen=True)
class Camera:
    """One registered camera.

    heading_deg/fov_deg are required for directed cameras and must be absent
    for round ones. Omitted fov_deg/range_m fall back to kind defaults.
    """

    id: str
    position: GeoPoint
    kind: str
    heading_deg: float | None = None
    fov_deg: float | None = None
    range_m: float | None = None
    source: str = "registry"
    confidence: float = 1.0
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in CAMERA_KINDS:
            raise InvalidCamera(f"kind: expected one of {CAMERA_KINDS}, got {self.kind!r}")
        if self.source not in CAMERA_SOURCES:
            raise InvalidCamera(f"source: expected one of {CAMERA_SOURCES}, got {self.source!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidCamera(f"confidence: {self.confidence} outside [0, 1]")

        if self.kind == "directed":
            if self.heading_deg is None:
                raise InvalidCamera("heading_deg: required for directed cameras")
            if not 0.0 <= self.heading_deg < 360.0:
                raise InvalidCamera(f"heading_deg: {self.heading_deg} outside [0, 360)")
            if self.fov_deg is None:
                object.__setattr__(self, "fov_deg", DEFAULT_DIRECTED_FOV_DEG)
            if not 0.0 < self.fov_deg <= 180.0:
                raise InvalidCamera(f"fov_deg: {self.fov_deg} outside (0, 180]")
            if self.range_m is None:
                object.__setattr__(self, "range_m", DEFAULT_DIRECTED_RANGE_M)
        else:
            if self.heading_deg is not None:
                raise InvalidCamera("heading_deg: not allowed for round cameras")
            if self.fov_deg is not None:
                raise InvalidCamera("fov_deg: not allowed for round cameras")
            if self.range_m is None:
                object.__setattr__(self, "range_m", DEFAULT_ROUND_RANGE_M)

        if not 0.0 < self.range_m <= MAX_RANGE_M:
            raise InvalidCamera(f"range_m: {self.range_m} outside (0, {MAX_RANGE_M}]")


@dataclass(frozen=True)
class Disc:
    radius_m: float


@dataclass(frozen=True)
class Sector:
    radius_m: float
    heading_deg: float
    fov_deg: float


Shape = Union[Disc, Sector]


@dataclass(frozen=True)
class CoverageZone:
    camera_id: str
    center: GeoPoint
    shape: Shape


def coverage_zone(camera: Camera) -> CoverageZone:
    """Footprint of a camera: Disc for round, Sector for directed."""
    if camera.kind == "round":
        shape: Shape = Disc(camera.range_m)
    else:
        shape = Sector(camera.range_m, camera.heading_deg, camera.fov_deg)
    return CoverageZone(camera.id, camera.position, shape)


def covers(zone: CoverageZone, p: GeoPoint, lateral_buffer_m: float = 0.0) -> bool:
    """Whether p lies inside the zone widened laterally by the given buffer.

    The buffer realizes street width (half-width) around sampled points: a
    disc grows by the buffer; a sector additionally gains the angular slack
    asin(buffer / dist) so points within the buffer of its bounding rays
    count as covered, and anything within the buffer of the apex is covered.
    """
    if lateral_buffer_m < 0:
        raise ValueError("lateral_buffer_m must be >= 0")
    dist = haversine_m(zone.center, p)
    shape = zone.shape
    if isinstance(shape, Disc):
        return dist <= shape.radius_m + lateral_buffer_m
    if dist > shape.radius_m + lateral_buffer_m:
        return False
    if dist <= lateral_buffer_m:
        return True
    if dist == 0.0:  # apex itself, zero buffer
        return True
    slack_deg = math.degrees(
        math.asin(min(1.0, lateral_buffer_m / max(dist, lateral_buffer_m)))
    )
    try:
        bearing = initial_bearing_deg(zone.center, p)
    except DegenerateInput:
        return True
    deviation = abs(wrap_angle_deg(bearing - shape.heading_deg))
    return deviation <= shape.fov_deg / 2.0 + slack_deg


def zone_polygon(zone: CoverageZone, arc_step_deg: float = 10.0) -> list[GeoPoint]:
    """Closed ring approximating the zone (first vertex repeated at the end).

    Discs get ceil(360 / step) arc vertices; sectors get ceil(fov / step) + 1
    arc vertices plus the apex at both ends of the ring.
    """
    if not 0.0 < arc_step_deg <= 360.0:
        raise ValueError(f"arc_step_deg {arc_step_deg} outside (0, 360]")
    shape = zone.shape
    if isinstance(shape, Disc):
        n = math.ceil(360.0 / arc_step_deg)
        ring = [
            destination_point(zone.center, i * 360.0 / n, shape.radius_m) for i in range(n)
        ]
        ring.append(ring[0])
        return ring
    n = math.ceil(shape.fov_deg / arc_step_deg)
    start = shape.heading_deg - shape.fov_deg / 2.0
    ring = [zone.center]
    ring.extend(
        destination_point(zone.center, start + i * shape.fov_deg / n, shape.radius_m)
        for i in range(n + 1)
    )
    ring.append(zone.center)
    return ring


# --- registry file format -------------------------------------------------
#
# GeoJSON FeatureCollection of Points. Known properties are the Camera
# fields; anything else is preserved verbatim through a load/dump cycle.

_KNOWN_PROPS = ("id", "kind", "heading_deg", "fov_deg", "range_m", "source", "confidence")


def camera_to_feature(camera: Camera) -> dict:
    props: dict = {"id": camera.id, "kind": camera.kind}
    if camera.kind == "directed":
        props["heading_deg"] = camera.heading_deg
        props["fov_deg"] = camera.fov_deg
    props["range_m"] = camera.range_m
    props["source"] = camera.source
    props["confidence"] = camera.confidence
    props.update(camera.extras)
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [camera.position.lon, camera.position.lat],
        },
        "properties": props,
    }


def feature_to_camera(feature: dict) -> Camera:
    if feature.get("type") != "Feature":
        raise InvalidCamera("type: expected 'Feature'")
    geom = feature.get("geometry") or {}
    if geom.get("type") != "Point":
        raise InvalidCamera("geometry: expected a Point")
    coords = geom.get("coordinates")
    if not isinstance(coords, (list, tuple)) or len(coords) != 2:
        raise InvalidCamera("geometry.coordinates: expected [lon, lat]")
    try:
        position = GeoPoint(float(coords[1]), float(coords[0]))
    except (TypeError, ValueError) as exc:
        raise InvalidCamera(f"geometry.coordinates: {exc}") from exc
    props = dict(feature.get("properties") or {})
    if "id" not in props:
        raise InvalidCamera("id: missing")
    if "kind" not in props:
        raise InvalidCamera("kind: missing")
    extras = {k: v for k, v in props.items() if k not in _KNOWN_PROPS}
    return Camera(
        id=str(props["id"]),
        position=position,
        kind=props["kind"],
        heading_deg=props.get("heading_deg"),
        fov_deg=props.get("fov_deg"),
        range_m=props.get("range_m"),
        source=props.get("source", "registry"),
        confidence=props.get("confidence", 1.0),
        extras=extras,
    )


def registry_to_geojson(cameras: list[Camera]) -> dict:
    return {
        "type": "FeatureCollection",
        "features": [camera_to_feature(c) for c in cameras],
    }


def load_registry(doc: dict | str | bytes) -> list[Camera]:
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if doc.get("type") != "FeatureCollection":
        raise InvalidCamera("type: expected 'FeatureCollection'")
    return [feature_to_camera(f) for f in doc.get("features", [])]


def read_registry(path: str | Path) -> list[Camera]:
    return load_registry(Path(path).read_text(encoding="utf-8"))


def write_registry(cameras: list[Camera], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(registry_to_geojson(cameras), indent=2) + "\n", encoding="utf-8"
    )
