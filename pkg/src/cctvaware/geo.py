"""Geodetic primitives: spherical distance, bearings, and a local planar frame.

All public angles are degrees (bearings clockwise from true north); all
distances are meters on a sphere of radius 6371 km. The local frame is a
plain equirectangular projection, which is plenty for the sub-200 m camera
ranges and city-scale graphs this library works with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# Degrees below which two coordinates are considered the same point.
COORD_EPS_DEG = 1e-9

# The equirectangular frame degrades away from its origin; 5 km keeps the
# relative distance error comfortably under 1e-4 at street latitudes.
MAX_PROJECTION_RANGE_M = 5_000.0


class OutOfProjectionRange(ValueError):
    """Point too far from the local-frame origin to project safely."""


class DegenerateInput(ValueError):
    """Operation undefined for coincident points."""


@dataclass(frozen=True)
class GeoPoint:
    """WGS84-style latitude/longitude pair, degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude {self.lat!r} outside [-90, 90]")
        if not (math.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude {self.lon!r} outside [-180, 180]")

    def almost_equals(self, other: "GeoPoint", eps_deg: float = COORD_EPS_DEG) -> bool:
        return abs(self.lat - other.lat) <= eps_deg and abs(self.lon - other.lon) <= eps_deg


@dataclass(frozen=True)
class LocalXY:
    """Planar offset from a declared origin: x meters east, y meters north."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("local coordinates must be finite")

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    s = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return EARTH_RADIUS_M * 2.0 * math.atan2(math.sqrt(s), math.sqrt(1.0 - s))


def project_local(origin: GeoPoint, p: GeoPoint) -> LocalXY:
    """Project p into the equirectangular frame anchored at origin.

    x = R * dlon * cos(lat_origin), y = R * dlat (angles in radians).
    Raises OutOfProjectionRange beyond 5 km from the origin.
    """
    if haversine_m(origin, p) > MAX_PROJECTION_RANGE_M:
        raise OutOfProjectionRange(
            f"point {p.lat},{p.lon} farther than {MAX_PROJECTION_RANGE_M} m from origin"
        )
    x = EARTH_RADIUS_M * math.radians(p.lon - origin.lon) * math.cos(math.radians(origin.lat))
    y = EARTH_RADIUS_M * math.radians(p.lat - origin.lat)
    return LocalXY(x, y)


def unproject_local(origin: GeoPoint, xy: LocalXY) -> GeoPoint:
    """Exact inverse of project_local on its 5 km domain."""
    if xy.norm() > MAX_PROJECTION_RANGE_M:
        raise OutOfProjectionRange(f"offset {xy.norm():.1f} m exceeds {MAX_PROJECTION_RANGE_M} m")
    lat = origin.lat + math.degrees(xy.y / EARTH_RADIUS_M)
    lon = origin.lon + math.degrees(
        xy.x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat)))
    )
    # Keep longitudes in range when the frame straddles the antimeridian.
    if lon > 180.0:
        lon -= 360.0
    elif lon < -180.0:
        lon += 360.0
    return GeoPoint(lat, lon)


def destination_point(origin: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """Point at the given bearing (clockwise from north) and distance from origin."""
    if distance_m < 0:
        raise ValueError(f"distance must be nonnegative, got {distance_m}")
    b = math.radians(bearing_deg)
    return unproject_local(
        origin, LocalXY(distance_m * math.sin(b), distance_m * math.cos(b))
    )


def initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> float:
    """Bearing from a to b in [0, 360), consistent with destination_point.

    Computed in a's local frame so that destination_point/initial_bearing
    round-trip exactly; shares the 5 km projection domain.
    """
    if a.almost_equals(b):
        raise DegenerateInput("bearing undefined for coincident points")
    xy = project_local(a, b)
    return math.degrees(math.atan2(xy.x, xy.y)) % 360.0


def wrap_angle_deg(angle_deg: float) -> float:
    """Wrap an angle difference into [-180, 180)."""
    return (angle_deg + 180.0) % 360.0 - 180.0
