"""CCTV coverage mapping, detection scoring/fusion, camera geolocation, and
privacy/safety-aware pedestrian routing."""

__version__ = "0.1.0"
