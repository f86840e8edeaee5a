"""Local metric plane for filtering WGS-84 tracks.

The filter runs in a per-track equirectangular plane anchored at the first
measurement: x = R * dlon * cos(lat0), y = R * dlat (angles in radians).
Within the ~50 km extent of a track the projection error is negligible
relative to the 10 m sensor noise, and the inverse is closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class LocalFrame:
    origin_lat: float
    origin_lon: float
    earth_radius: float = EARTH_RADIUS_M

    @property
    def cos_lat0(self) -> float:
        return math.cos(math.radians(self.origin_lat))


def project(lat, lon, frame: LocalFrame):
    """WGS-84 degrees -> local plane meters. Accepts scalars or arrays."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    x = frame.earth_radius * np.radians(lon - frame.origin_lon) * frame.cos_lat0
    y = frame.earth_radius * np.radians(lat - frame.origin_lat)
    return x, y


def unproject(x, y, frame: LocalFrame):
    """Local plane meters -> WGS-84 degrees. Exact inverse of project."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lat = frame.origin_lat + np.degrees(y / frame.earth_radius)
    lon = frame.origin_lon + np.degrees(x / (frame.earth_radius * frame.cos_lat0))
    return lat, lon


def haversine_m(lat1, lon1, lat2, lon2, radius: float = EARTH_RADIUS_M):
    """Great-circle distance in meters between WGS-84 points."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * radius * math.asin(min(1.0, math.sqrt(a)))
