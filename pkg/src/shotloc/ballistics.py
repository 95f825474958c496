"""Shooter distance from the shock-to-muzzle delay at one camera.

A supersonic bullet drags a conical shock front behind it; a camera
near the line of fire hears that crack first and the muzzle blast
Tdiff seconds later. Decomposing the geometry along and across the
trajectory gives two linear equations in two unknown leg times:

  T1: bullet flight from muzzle to the shock detachment point
  T2: sound flight from the detachment point to the camera

with theta = arcsin(vs/vb) the cone half-angle and alpha the camera's
angular offset from the trajectory:

  along: (vb - vs*cos(alpha))*T1 + vs*(sin(theta) - cos(alpha))*T2
           = vs*Tdiff*cos(alpha)
  across: (-vs*sin(alpha))*T1 + vs*(cos(theta) - sin(alpha))*T2
           = vs*Tdiff*sin(alpha)

and the slant distance follows as D = vs*(T1 + T2 + Tdiff). With
alpha = 0 this collapses to D = vs*vb*Tdiff/(vb - vs), a useful exact
check. None of vs, vb, alpha are knowable exactly in the field, so the
estimator sweeps uniform draws over user-supplied ranges and returns
the spread of feasible distances, which downstream rendering turns
into an annulus around the camera.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ElevationExceedsDistance,
    InfeasibleGeometry,
    NoFeasibleSamples,
    SingularSystem,
    Subsonic,
)

DET_EPS = 1e-12


def mach_angle(vs: float, vb: float) -> float:
    """Half-angle of the ballistic cone, radians."""
    if vs <= 0 or vb <= vs:
        raise Subsonic(f"need vb > vs > 0, got vb={vb} vs={vs}")
    return math.asin(vs / vb)


def _system(vs, vb, alpha_rad, tdiff):
    """Coefficients of the 2x2 along/across system. Works elementwise on
    arrays; callers mask vb <= vs before trusting theta."""
    theta = np.arcsin(np.clip(vs / vb, 0.0, 1.0))
    ca, sa = np.cos(alpha_rad), np.sin(alpha_rad)
    a11 = vb - vs * ca
    a12 = vs * (np.sin(theta) - ca)
    a21 = -vs * sa
    a22 = vs * (np.cos(theta) - sa)
    b1 = vs * tdiff * ca
    b2 = vs * tdiff * sa
    return a11, a12, a21, a22, b1, b2


def solve_t1_t2(vs: float, vb: float, alpha_deg: float, tdiff: float) -> tuple[float, float]:
    """Solve for the two leg times at exact parameter values."""
    if vb <= vs or vs <= 0:
        raise Subsonic(f"need vb > vs > 0, got vb={vb} vs={vs}")
    if tdiff <= 0:
        raise InfeasibleGeometry(f"shock must precede muzzle blast, tdiff={tdiff}")
    if not 0.0 <= alpha_deg < 90.0:
        raise InfeasibleGeometry(f"alpha must be in [0, 90) degrees, got {alpha_deg}")
    a11, a12, a21, a22, b1, b2 = _system(vs, vb, math.radians(alpha_deg), tdiff)
    det = a11 * a22 - a12 * a21
    if abs(det) < DET_EPS:
        raise SingularSystem(f"degenerate timing system, det={det}")
    t1 = (b1 * a22 - a12 * b2) / det
    t2 = (a11 * b2 - b1 * a21) / det
    if t1 < 0 or t2 < 0:
        raise InfeasibleGeometry(f"negative leg time t1={t1} t2={t2}")
    return float(t1), float(t2)


def slant_distance(tdiff: float, vs: float, vb: float, alpha_deg: float) -> float:
    """Shooter-to-camera distance along the line of sight, meters."""
    t1, t2 = solve_t1_t2(vs, vb, alpha_deg, tdiff)
    d = vs * (t1 + t2 + tdiff)
    if d <= 0:
        raise InfeasibleGeometry(f"nonpositive distance {d}")
    return float(d)


def horizontal_distance(d: float, elevation_diff: float) -> float:
    """Map-plane distance given slant distance and the shooter-camera
    height difference."""
    if abs(elevation_diff) > d:
        raise ElevationExceedsDistance(
            f"height offset {elevation_diff} exceeds slant distance {d}"
        )
    return float(math.sqrt(max(d * d - elevation_diff * elevation_diff, 0.0)))


@dataclass(frozen=True)
class Method1Inputs:
    tdiff: float
    vs_range: tuple[float, float] = (331.3, 346.0)
    vb_range: tuple[float, float] = (400.0, 1000.0)
    alpha_deg_range: tuple[float, float] = (0.0, 15.0)
    elevation_diff: float = 0.0
    n_samples: int = 10000

    def __post_init__(self):
        if self.tdiff <= 0:
            raise InfeasibleGeometry(f"tdiff must be positive, got {self.tdiff}")
        for name, (lo, hi) in (
            ("vs_range", self.vs_range),
            ("vb_range", self.vb_range),
            ("alpha_deg_range", self.alpha_deg_range),
        ):
            if not lo <= hi:
                raise ValueError(f"{name} reversed: {lo} > {hi}")
        if self.vs_range[0] <= 0:
            raise ValueError("sound speed must be positive")
        if not 0.0 <= self.alpha_deg_range[0] or not self.alpha_deg_range[1] < 90.0:
            raise ValueError("alpha range must sit inside [0, 90) degrees")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")


@dataclass(frozen=True, eq=False)
class DistanceEstimate:
    """Spread of feasible distances under parameter uncertainty.

    dh_samples holds the horizontal distance of every feasible draw so
    rendering can build a density profile, not just the [min, max]
    envelope."""

    slant_min: float
    slant_max: float
    slant_mean: float
    dh_min: float
    dh_max: float
    dh_mean: float
    dh_samples: np.ndarray
    n_requested: int
    n_feasible: int


def estimate_method1(inputs: Method1Inputs, seed: int = 0) -> DistanceEstimate:
    """Monte Carlo sweep of the timing system over the parameter box.

    Draws (vs, vb, alpha) uniformly and independently, solves every
    draw at once, and drops draws that are unphysical (subsonic pair,
    negative leg time, slant shorter than the height offset). Raises
    NoFeasibleSamples when nothing survives, which in practice means
    the marked Tdiff or the ranges are wrong.
    """
    n = inputs.n_samples
    rng = np.random.default_rng(seed)
    vs = rng.uniform(inputs.vs_range[0], inputs.vs_range[1], n)
    vb = rng.uniform(inputs.vb_range[0], inputs.vb_range[1], n)
    alpha = np.radians(rng.uniform(inputs.alpha_deg_range[0], inputs.alpha_deg_range[1], n))

    ok = vb > vs
    a11, a12, a21, a22, b1, b2 = _system(vs, vb, alpha, inputs.tdiff)
    det = a11 * a22 - a12 * a21
    ok &= np.abs(det) > DET_EPS
    safe_det = np.where(ok, det, 1.0)
    t1 = (b1 * a22 - a12 * b2) / safe_det
    t2 = (a11 * b2 - b1 * a21) / safe_det
    d = vs * (t1 + t2 + inputs.tdiff)
    ok &= (t1 >= 0) & (t2 >= 0) & (d > 0)
    ok &= d >= abs(inputs.elevation_diff)

    if not ok.any():
        raise NoFeasibleSamples(
            f"all {n} draws infeasible for tdiff={inputs.tdiff}; check marks and ranges"
        )
    d = d[ok]
    dh = np.sqrt(np.maximum(d * d - inputs.elevation_diff**2, 0.0))
    return DistanceEstimate(
        slant_min=float(d.min()),
        slant_max=float(d.max()),
        slant_mean=float(d.mean()),
        dh_min=float(dh.min()),
        dh_max=float(dh.max()),
        dh_mean=float(dh.mean()),
        dh_samples=dh,
        n_requested=n,
        n_feasible=int(ok.sum()),
    )
