"""Walkthrough: camera kinds, coverage zones, and point-coverage queries.

Run with: python demos/coverage_zones.py
"""

from cctvaware.cameras import Camera, coverage_zone, covers, zone_polygon
from cctvaware.geo import GeoPoint, destination_point

corner = GeoPoint(60.1699, 24.9384)

# A dome camera on a storefront watches a full disc around its mount.
dome = Camera(id="storefront-dome", position=corner, kind="round", range_m=15.0)

# A bullet camera across the street watches a 90 degree sector looking east.
bullet = Camera(
    id="pole-bullet",
    position=destination_point(corner, 270.0, 40.0),
    kind="directed",
    heading_deg=90.0,
    fov_deg=90.0,
    range_m=30.0,
)

for camera in (dome, bullet):
    zone = coverage_zone(camera)
    print(f"{camera.id}: {zone.shape}")

# Probe a few street positions. The buffer argument is half the street
# width: someone walking the far sidewalk of an 8 m street is still exposed
# when the zone reaches within 4 m of them.
probes = {
    "right under the dome": corner,
    "20 m east of the dome": destination_point(corner, 90.0, 20.0),
    "10 m east of the bullet": destination_point(bullet.position, 90.0, 10.0),
    "10 m north of the bullet": destination_point(bullet.position, 0.0, 10.0),
}
print()
print(f"{'position':28s} {'dome':>6s} {'bullet':>7s}")
for label, p in probes.items():
    in_dome = covers(coverage_zone(dome), p, lateral_buffer_m=4.0)
    in_bullet = covers(coverage_zone(bullet), p, lateral_buffer_m=4.0)
    print(f"{label:28s} {str(in_dome):>6s} {str(in_bullet):>7s}")

# Zones render as closed rings for map overlays; the sector ring includes
# the camera position (the apex) so it draws as a wedge.
ring = zone_polygon(coverage_zone(bullet), arc_step_deg=15.0)
print()
print(f"bullet sector ring has {len(ring)} vertices, first == last: {ring[0] == ring[-1]}")
print("first three vertices:")
for p in ring[:3]:
    print(f"  {p.lat:.6f}, {p.lon:.6f}")
