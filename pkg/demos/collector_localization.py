"""Walkthrough: turning mobile-collector sightings into registry cameras.

A collector walks a street, rangefinding the same dome camera three times
and a distant bullet camera once. The sightings are localized, clustered
into cameras, and checked against an existing registry.

Run with: python demos/collector_localization.py
"""

from cctvaware.cameras import Camera
from cctvaware.geo import GeoPoint, destination_point, haversine_m
from cctvaware.localize import Observation, cluster, localize, validate_registry

street_start = GeoPoint(60.1680, 24.9400)


def sighting(walk_m, heading, dist_m, kind, ref):
    return Observation(
        observer=destination_point(street_start, 90.0, walk_m),
        gps_sigma_m=5.0,
        heading_deg=heading,
        range_m=dist_m,
        range_sigma_m=0.002,  # laser rangefinder
        kind=kind,
        score=0.9,
        timestamp=1700000000.0 + walk_m,
        image_ref=ref,
    )


observations = [
    sighting(0.0, 10.0, 21.0, "round", "frame-001"),
    sighting(4.0, 355.0, 20.5, "round", "frame-007"),
    sighting(8.0, 340.0, 21.5, "round", "frame-012"),
    sighting(60.0, 85.0, 55.0, "directed", "frame-031"),
]

estimates = [localize(o) for o in observations]
for o, e in zip(observations, estimates):
    print(f"{o.image_ref}: localized {e.kind} at {e.position.lat:.6f},{e.position.lon:.6f} "
          f"sigma {e.position_sigma_m:.2f} m")

cameras = cluster(estimates, eps_m=8.0)
print(f"\nclustered {len(observations)} sightings into {len(cameras)} cameras:")
for cam in cameras:
    print(f"  {cam.id}: {cam.kind} at {cam.position.lat:.6f},{cam.position.lon:.6f} "
          f"confidence {cam.confidence}")

# Compare against a registry that already knows the dome but also claims a
# camera nobody sighted.
registry = [
    Camera(id="known-dome",
           position=destination_point(street_start, 10.0, 21.0), kind="round"),
    Camera(id="claimed-but-gone",
           position=destination_point(street_start, 180.0, 80.0), kind="round"),
]
report = validate_registry(registry, estimates, radius_m=15.0)
print("\nregistry validation:")
for check in report.checks:
    nearest = "-" if check.nearest_estimate_m is None else f"{check.nearest_estimate_m:.1f} m"
    print(f"  {check.camera_id}: {check.status} (nearest estimate {nearest})")
print(f"  novel sightings with no registry counterpart: {len(report.novel)}")
for est in report.novel:
    d = haversine_m(street_start, est.position)
    print(f"    {est.provenance[0]} ({est.kind}, {d:.0f} m from the street start)")
