"""Local-frame geodesy and map geometry.

All map math runs in a local east-north-up (ENU) frame anchored at a
LocalFrame origin. The projection is equirectangular with mean Earth
radius R = 6371000 m:

    east  = (lon - lon0) * cos(lat0) * R * pi/180
    north = (lat - lat0) * R * pi/180
    up    = elev - elev0

This is a stated approximation: at event scale (points within a few km
of the origin, mid latitudes) planar distances stay within 0.2% of
great-circle distances, far below the acoustic error budget, and the
forward/inverse transforms are exact algebraic inverses of each other.
Accuracy degrades toward the poles; frames are rejected at |lat0| = 90.

Geometry emitters (annulus rings, hyperbola branches) work in the ENU
east/north plane (elevation handled separately by the distance math) and
convert to GeoJSON (RFC 7946): lon-lat order, WGS84, exterior rings
counterclockwise, holes clockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateAnnulus,
    InfeasibleSeparation,
    InvalidCoordinate,
    OutOfFrame,
)

EARTH_RADIUS_M = 6_371_000.0
MAX_FRAME_RADIUS_M = 100_000.0
_DEG = math.pi / 180.0

# coordinate rounding for emitted GeoJSON: 1e-7 deg is about 1 cm
GEOJSON_DECIMALS = 7


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 position, elevation in meters above the frame reference."""

    lat: float
    lon: float
    elev: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon) and math.isfinite(self.elev)):
            raise InvalidCoordinate(f"non-finite coordinate {self!r}")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidCoordinate(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidCoordinate(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class EnuPoint:
    """Planar east/north (+up) meters relative to one LocalFrame origin."""

    east: float
    north: float
    up: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.east, self.north, self.up)):
            raise InvalidCoordinate(f"non-finite ENU point {self!r}")

    def planar(self) -> np.ndarray:
        return np.array([self.east, self.north])


@dataclass(frozen=True)
class LocalFrame:
    origin: GeoPoint = field(default_factory=lambda: GeoPoint(0.0, 0.0))

    def __post_init__(self):
        if not -90.0 < self.origin.lat < 90.0:
            raise InvalidCoordinate("frame origin latitude must be strictly inside (-90, 90)")


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters (spherical Earth, radius R)."""
    la1, la2 = math.radians(a.lat), math.radians(b.lat)
    dla = la2 - la1
    dlo = math.radians(b.lon - a.lon)
    h = math.sin(dla / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlo / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def to_enu(frame: LocalFrame, p: GeoPoint) -> EnuPoint:
    """Project a GeoPoint into the frame's ENU plane.

    Raises OutOfFrame beyond 100 km of the origin, where the
    equirectangular approximation is no longer defensible.
    """
    o = frame.origin
    if haversine_m(o, p) > MAX_FRAME_RADIUS_M:
        raise OutOfFrame(f"{p} is farther than {MAX_FRAME_RADIUS_M / 1000:.0f} km from frame origin")
    east = (p.lon - o.lon) * math.cos(math.radians(o.lat)) * EARTH_RADIUS_M * _DEG
    north = (p.lat - o.lat) * EARTH_RADIUS_M * _DEG
    return EnuPoint(east, north, p.elev - o.elev)


def from_enu(frame: LocalFrame, e: EnuPoint) -> GeoPoint:
    """Exact algebraic inverse of to_enu."""
    o = frame.origin
    lat = o.lat + e.north / (EARTH_RADIUS_M * _DEG)
    lon = o.lon + e.east / (EARTH_RADIUS_M * _DEG * math.cos(math.radians(o.lat)))
    return GeoPoint(lat, lon, o.elev + e.up)


def _lonlat(frame: LocalFrame, east: float, north: float) -> list:
    g = from_enu(frame, EnuPoint(east, north))
    return [round(g.lon, GEOJSON_DECIMALS), round(g.lat, GEOJSON_DECIMALS)]


def annulus_polygon(
    frame: LocalFrame,
    center: EnuPoint,
    r_min: float,
    r_max: float,
    segments: int = 128,
) -> dict:
    """GeoJSON Polygon for the ring r_min <= r <= r_max around center.

    Outer ring counterclockwise, inner ring (the hole) clockwise per the
    RFC 7946 right-hand rule. r_min = 0 yields a plain disc.
    """
    if not (math.isfinite(r_min) and math.isfinite(r_max)) or r_min < 0:
        raise InvalidCoordinate("annulus radii must be finite and non-negative")
    if r_min >= r_max:
        raise DegenerateAnnulus(f"r_min {r_min} >= r_max {r_max}")
    if segments < 16:
        raise ValueError("segments must be >= 16")

    t = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    cos_t, sin_t = np.cos(t), np.sin(t)

    def ring(r, clockwise):
        e = center.east + r * cos_t
        n = center.north + r * sin_t
        pts = [_lonlat(frame, ei, ni) for ei, ni in zip(e, n)]
        if clockwise:
            pts = pts[::-1]
        pts.append(pts[0])
        return pts

    rings = [ring(r_max, clockwise=False)]
    if r_min > 0:
        rings.append(ring(r_min, clockwise=True))
    return {"type": "Polygon", "coordinates": rings}


def hyperbola_polyline(
    f_near: EnuPoint,
    f_far: EnuPoint,
    two_a: float,
    extent: float,
    step: float | None = None,
) -> list[EnuPoint]:
    """Sample the hyperbola branch wrapping f_near.

    Every returned point P satisfies dist(P, f_far) - dist(P, f_near) =
    two_a (exact up to float rounding). two_a = 0 degenerates to the
    perpendicular bisector of the foci segment, returned as a straight
    polyline. Points extend up to `extent` meters from the focal
    midpoint; `step` controls sampling density (default extent/512).
    """
    if two_a < 0:
        raise ValueError("two_a must be non-negative")
    if extent <= 0:
        raise ValueError("extent must be positive")
    if step is None:
        step = extent / 512.0

    fn = f_near.planar()
    ff = f_far.planar()
    d = float(np.linalg.norm(ff - fn))
    if two_a >= d:
        raise InfeasibleSeparation(f"2a = {two_a:.3f} m >= focal separation {d:.3f} m")

    center = 0.5 * (fn + ff)
    x_hat = (fn - center) / (d / 2.0)
    y_hat = np.array([-x_hat[1], x_hat[0]])

    if two_a == 0.0:
        n = max(2, int(math.ceil(2.0 * extent / step)) + 1)
        offs = np.linspace(-extent, extent, n)
        pts = center[None, :] + offs[:, None] * y_hat[None, :]
        return [EnuPoint(float(e), float(v)) for e, v in pts]

    a = two_a / 2.0
    c = d / 2.0
    b = math.sqrt(c * c - a * a)

    if extent <= a:
        vertex = center + a * x_hat
        return [EnuPoint(float(vertex[0]), float(vertex[1]))]

    # parameter limit where |P - center| reaches extent
    u = (extent * extent - a * a) / (a * a + b * b) if (a * a + b * b) > 0 else 0.0
    t_max = math.asinh(math.sqrt(max(u, 0.0)))
    half = max(16, int(math.ceil(extent / step)))
    t = np.linspace(-t_max, t_max, 2 * half + 1)
    xs = a * np.cosh(t)
    ys = b * np.sinh(t)
    pts = center[None, :] + xs[:, None] * x_hat[None, :] + ys[:, None] * y_hat[None, :]
    return [EnuPoint(float(e), float(v)) for e, v in pts]


def polyline_feature(frame: LocalFrame, points: list[EnuPoint], properties: dict | None = None) -> dict:
    coords = [_lonlat(frame, p.east, p.north) for p in points]
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": dict(properties or {}),
    }


def annulus_feature(
    frame: LocalFrame,
    center: EnuPoint,
    r_min: float,
    r_max: float,
    segments: int = 128,
    properties: dict | None = None,
) -> dict:
    return {
        "type": "Feature",
        "geometry": annulus_polygon(frame, center, r_min, r_max, segments),
        "properties": dict(properties or {}),
    }


def polygon_feature(
    frame: LocalFrame,
    exterior: list[EnuPoint],
    holes: list[list[EnuPoint]] | None = None,
    properties: dict | None = None,
) -> dict:
    """Feature from explicit rings. Rings are closed here if needed; the
    caller is responsible for winding (CCW exterior, CW holes)."""

    def ring(pts):
        coords = [_lonlat(frame, p.east, p.north) for p in pts]
        if coords[0] != coords[-1]:
            coords.append(coords[0])
        return coords

    rings = [ring(exterior)] + [ring(h) for h in holes or []]
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": rings},
        "properties": dict(properties or {}),
    }


def point_feature(frame: LocalFrame, p: EnuPoint, properties: dict | None = None) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": _lonlat(frame, p.east, p.north)},
        "properties": dict(properties or {}),
    }


def feature_collection(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": list(features)}
