"""Shooter bearing from muzzle-blast arrival order between camera pairs.

Two cameras hear the same muzzle blast at global times t_i and t_j.
The shooter then lies on one branch of a hyperbola with the cameras as
foci: the range difference to the two cameras is fixed at
2a = vs * |t_j - t_i|, on the side of the earlier arrival.

Neither the sound speed nor the mark times are exact, so a pair yields
a band bracketed by three curves instead of one:

  lower:  vs_min * max(t - eps, 0)
  center: vs_mean * t
  upper:  vs_max * (t + eps)

where eps absorbs marking jitter (default 0.033 s, one frame of
30 fps video). An earlier variant computed the center line as
vs_mean * max(t - eps, 0); pass legacy_center=True to reproduce it.

With t = 0 the arrival order is unknowable, so only the perpendicular
bisector is drawable, and the band straddles it symmetrically. Any line
whose 2a reaches the camera separation cannot be drawn (the range
difference between two points never reaches the distance between
them); if even the lower line is out, the pair is reported as
contradictory rather than silently clipped.

Bands live in the map plane: camera heights are ignored here, which
understates the range difference by under a few meters for the
geometries this tool targets, well inside the jitter allowance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CoincidentCameras, FullyInfeasible
from .geo import EnuPoint, hyperbola_polyline

DEFAULT_JITTER_S = 0.033
MIN_SEPARATION_M = 1e-6

ROLES = ("lower", "center", "upper")


def two_a_lines(
    delta_t: float,
    vs_range: tuple[float, float] = (331.3, 346.0),
    jitter_s: float = DEFAULT_JITTER_S,
    legacy_center: bool = False,
) -> tuple[float, float, float]:
    """Range-difference values (lower, center, upper) for one pair."""
    if delta_t < 0:
        raise ValueError("delta_t is an ordered, unsigned delay")
    vs_min, vs_max = vs_range
    if not 0 < vs_min <= vs_max:
        raise ValueError(f"bad sound speed range {vs_range}")
    if jitter_s < 0:
        raise ValueError("jitter must be nonnegative")
    vs_mean = 0.5 * (vs_min + vs_max)
    lower = vs_min * max(delta_t - jitter_s, 0.0)
    if legacy_center:
        center = vs_mean * max(delta_t - jitter_s, 0.0)
    else:
        center = vs_mean * delta_t
    upper = vs_max * (delta_t + jitter_s)
    return lower, center, upper


@dataclass(frozen=True)
class HyperbolaBand:
    """One camera pair's constraint on the shooter position."""

    near: EnuPoint  # focus on the shooter's side (earlier arrival)
    far: EnuPoint
    separation: float  # planar focus distance, m
    delta_t: float  # unsigned ordered delay, s
    two_a_lower: float
    two_a_center: float
    two_a_upper: float
    degenerate: bool  # simultaneous arrivals: side unknown, bisector band
    infeasible_lines: tuple[str, ...]  # roles whose curve cannot exist


def compute_band(
    t_i: float,
    t_j: float,
    cam_i: EnuPoint,
    cam_j: EnuPoint,
    vs_range: tuple[float, float] = (331.3, 346.0),
    jitter_s: float = DEFAULT_JITTER_S,
    legacy_center: bool = False,
) -> HyperbolaBand:
    if t_j >= t_i:
        near, far = cam_i, cam_j
        delta_t = t_j - t_i
    else:
        near, far = cam_j, cam_i
        delta_t = t_i - t_j

    de = far.east - near.east
    dn = far.north - near.north
    separation = float((de * de + dn * dn) ** 0.5)
    if separation < MIN_SEPARATION_M:
        raise CoincidentCameras(f"camera pair {separation} m apart on the map")

    lower, center, upper = two_a_lines(delta_t, vs_range, jitter_s, legacy_center)
    if lower >= separation:
        raise FullyInfeasible(
            f"minimum range difference {lower:.1f} m exceeds the "
            f"{separation:.1f} m between cameras; marks or geometry are wrong"
        )
    infeasible = tuple(
        role
        for role, two_a in zip(ROLES, (lower, center, upper))
        if two_a >= separation
    )
    return HyperbolaBand(
        near=near,
        far=far,
        separation=separation,
        delta_t=delta_t,
        two_a_lower=lower,
        two_a_center=center,
        two_a_upper=upper,
        degenerate=delta_t == 0.0,
        infeasible_lines=infeasible,
    )


def band_polylines(
    band: HyperbolaBand, extent: float, step: float | None = None
) -> dict[str, list[EnuPoint]]:
    """Drawable curves, keyed by role. Degenerate bands yield only the
    bisector; infeasible lines are omitted."""
    if band.degenerate:
        return {"center": hyperbola_polyline(band.near, band.far, 0.0, extent, step=step)}
    out: dict[str, list[EnuPoint]] = {}
    for role, two_a in zip(
        ROLES, (band.two_a_lower, band.two_a_center, band.two_a_upper)
    ):
        if role in band.infeasible_lines:
            continue
        out[role] = hyperbola_polyline(band.near, band.far, two_a, extent, step=step)
    return out
