"""Mobile-collector sightings: localization, clustering, registry validation.

A collector observation pairs a GPS fix with a device bearing and a
laser-ranged distance to the detected camera. Localization pushes the
observer position along the bearing; repeated sightings of one camera are
merged by single-linkage clustering and compared against an existing
registry to confirm, refute, or extend it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .cameras import Camera
from .geo import GeoPoint, destination_point, haversine_m

OBS_SCHEMA_VERSION = "cctv-obs/1"

DEFAULT_HEADING_SIGMA_DEG = 1.0
DEFAULT_CLUSTER_EPS_M = 8.0
DEFAULT_VALIDATE_RADIUS_M = 15.0

# Floor for inverse-variance weights so exact (sigma 0) estimates stay finite.
_MIN_SIGMA_M = 0.1


class InvalidObservation(ValueError):
    pass


class ObservationLogError(ValueError):
    """Log file does not follow the cctv-obs/1 schema; message cites the line."""


@dataclass(frozen=True)
class Observation:
    observer: GeoPoint
    gps_sigma_m: float
    heading_deg: float
    range_m: float
    range_sigma_m: float
    kind: str
    score: float
    timestamp: float
    image_ref: str

    def __post_init__(self) -> None:
        if not 0.0 < self.range_m <= 200.0:
            raise InvalidObservation(f"range_m {self.range_m} outside (0, 200]")
        if self.gps_sigma_m < 0 or self.range_sigma_m < 0:
            raise InvalidObservation("sigmas must be >= 0")
        if not 0.0 <= self.heading_deg < 360.0:
            raise InvalidObservation(f"heading_deg {self.heading_deg} outside [0, 360)")
        if self.kind not in ("directed", "round"):
            raise InvalidObservation(f"kind {self.kind!r} not directed/round")
        if not 0.0 <= self.score <= 1.0:
            raise InvalidObservation(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class CameraEstimate:
    position: GeoPoint
    position_sigma_m: float
    kind: str
    score: float
    provenance: tuple[str, ...] = ()
    # kept for heading reconstruction when clustering directed sightings
    observer_bearing_deg: float | None = None

    def __post_init__(self) -> None:
        if self.position_sigma_m < 0:
            raise ValueError("position_sigma_m must be >= 0")


def localize(
    obs: Observation, heading_sigma_deg: float = DEFAULT_HEADING_SIGMA_DEG
) -> CameraEstimate:
    """World position of the sighted camera plus a 1-sigma radius.

    Position error combines the GPS sigma, the rangefinder sigma, and the
    cross-track term range * sin(heading_sigma) in quadrature.
    """
    position = destination_point(obs.observer, obs.heading_deg, obs.range_m)
    cross_track = obs.range_m * math.sin(math.radians(heading_sigma_deg))
    sigma = math.sqrt(obs.gps_sigma_m**2 + obs.range_sigma_m**2 + cross_track**2)
    return CameraEstimate(
        position=position,
        position_sigma_m=sigma,
        kind=obs.kind,
        score=obs.score,
        provenance=(obs.image_ref,),
        observer_bearing_deg=obs.heading_deg,
    )


def cluster(
    estimates: list[CameraEstimate],
    eps_m: float = DEFAULT_CLUSTER_EPS_M,
    id_prefix: str = "localized",
) -> list[Camera]:
    """Merge repeated sightings into cameras by single-linkage clustering.

    Each cluster becomes one Camera at the inverse-variance weighted
    centroid; kind by majority vote (ties go to directed), confidence is the
    best member score. Directed clusters take the circular-mean reciprocal
    of the observation bearings as heading (the camera faces its observers).
    """
    if eps_m <= 0:
        raise ValueError("eps_m must be > 0")
    n = len(estimates)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if haversine_m(estimates[i].position, estimates[j].position) <= eps_m:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    cameras = []
    ordered = sorted(groups.values(), key=min)
    for seq, indices in enumerate(ordered, start=1):
        members = [estimates[i] for i in indices]
        weights = [1.0 / max(e.position_sigma_m, _MIN_SIGMA_M) ** 2 for e in members]
        total = sum(weights)
        lat = sum(w * e.position.lat for w, e in zip(weights, members)) / total
        lon = sum(w * e.position.lon for w, e in zip(weights, members)) / total
        n_directed = sum(1 for e in members if e.kind == "directed")
        kind = "directed" if n_directed * 2 >= len(members) else "round"
        provenance = tuple(ref for e in members for ref in e.provenance)
        heading = None
        if kind == "directed":
            sx = sy = 0.0
            for e in members:
                if e.kind != "directed" or e.observer_bearing_deg is None:
                    continue
                back = math.radians((e.observer_bearing_deg + 180.0) % 360.0)
                sx += math.sin(back)
                sy += math.cos(back)
            heading = math.degrees(math.atan2(sx, sy)) % 360.0 if (sx or sy) else 0.0
        cameras.append(
            Camera(
                id=f"{id_prefix}-{seq}",
                position=GeoPoint(lat, lon),
                kind=kind,
                heading_deg=heading,
                source="localized",
                confidence=max(e.score for e in members),
                extras={"provenance": list(provenance)},
            )
        )
    return cameras


@dataclass(frozen=True)
class RegistryCheck:
    camera_id: str
    status: str  # "confirmed" | "unconfirmed"
    nearest_estimate_m: float | None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[RegistryCheck, ...]
    novel: tuple[CameraEstimate, ...]

    @property
    def confirmed(self) -> int:
        return sum(1 for c in self.checks if c.status == "confirmed")

    @property
    def unconfirmed(self) -> int:
        return sum(1 for c in self.checks if c.status == "unconfirmed")


def validate_registry(
    registry: list[Camera],
    estimates: list[CameraEstimate],
    radius_m: float = DEFAULT_VALIDATE_RADIUS_M,
) -> ValidationReport:
    """Confirm registry cameras with nearby estimates; list leftovers as novel."""
    if radius_m <= 0:
        raise ValueError("radius_m must be > 0")
    checks = []
    used_for_confirm = [False] * len(estimates)
    for cam in registry:
        nearest = None
        for i, est in enumerate(estimates):
            d = haversine_m(cam.position, est.position)
            if nearest is None or d < nearest:
                nearest = d
            if d <= radius_m:
                used_for_confirm[i] = True
        status = "confirmed" if nearest is not None and nearest <= radius_m else "unconfirmed"
        checks.append(RegistryCheck(cam.id, status, nearest))
    novel = tuple(est for i, est in enumerate(estimates) if not used_for_confirm[i])
    return ValidationReport(tuple(checks), novel)


# --- observation log format -----------------------------------------------------
#
# Line 1 is the literal schema version; each following line is one CSV
# record: timestamp, lat, lon, gps_sigma_m, heading_deg, range_m,
# range_sigma_m, kind, score, image_ref.

_LOG_FIELDS = 10


def parse_observation_log(text: str) -> list[Observation]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != OBS_SCHEMA_VERSION:
        raise ObservationLogError(f"line 1: expected header {OBS_SCHEMA_VERSION!r}")
    observations = []
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != _LOG_FIELDS:
            raise ObservationLogError(f"line {row_no}: expected {_LOG_FIELDS} fields, got {len(row)}")
        try:
            observations.append(
                Observation(
                    observer=GeoPoint(float(row[1]), float(row[2])),
                    gps_sigma_m=float(row[3]),
                    heading_deg=float(row[4]),
                    range_m=float(row[5]),
                    range_sigma_m=float(row[6]),
                    kind=row[7].strip(),
                    score=float(row[8]),
                    timestamp=float(row[0]),
                    image_ref=row[9],
                )
            )
        except (ValueError, InvalidObservation) as exc:
            raise ObservationLogError(f"line {row_no}: {exc}") from exc
    return observations


def read_observation_log(path: str | Path) -> list[Observation]:
    return parse_observation_log(Path(path).read_text(encoding="utf-8"))


def format_observation_log(observations: list[Observation]) -> str:
    out = io.StringIO()
    out.write(OBS_SCHEMA_VERSION + "\n")
    writer = csv.writer(out, lineterminator="\n")
    for o in observations:
        writer.writerow([
            o.timestamp, o.observer.lat, o.observer.lon, o.gps_sigma_m,
            o.heading_deg, o.range_m, o.range_sigma_m, o.kind, o.score, o.image_ref,
        ])
    return out.getvalue()
