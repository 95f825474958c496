"""Forward synthesis of gunshot scenes.

Places a shooter, a supersonic trajectory, and cameras in local ENU
coordinates, then computes exact arrival times of the two acoustic
events at each camera:

- muzzle blast: spherical wave from the firing point, trivially
  distance / sound speed,
- ballistic shock: the first arrival over all paths that ride the
  bullet to some detachment point s along the trajectory and then
  travel as sound to the camera. t(s) = s/vb + |shooter + s*u - cam|/vs
  is convex in s, so the minimum over s in [0, proj] is found
  numerically. A camera hears the shock only when the optimal
  detachment point is strictly past the muzzle.

The timing route here shares no algebra with the inversion code: no
cone angles, no linear systems. That makes round-trip agreement between
the two a real check rather than a tautology.

Also provides seeded random scene generation (with exact per-camera
distance and miss-angle ground truth) and per-camera audio synthesis,
so the whole pipeline from waveform to map can be exercised without
field recordings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .audio import AudioClip
from .errors import ConstraintUnsatisfiable, Subsonic
from .geo import EnuPoint

MIN_DETACH_M = 1e-9


@dataclass(frozen=True)
class Scene:
    """A shooter, one shot, and the cameras that might record it."""

    shooter: EnuPoint
    azimuth_deg: float  # trajectory bearing, degrees clockwise from north
    inclination_deg: float  # elevation angle of the trajectory, + is up
    vb: float  # bullet speed, m/s (constant along the modeled segment)
    vs: float  # speed of sound, m/s
    cameras: dict[str, EnuPoint] = field(default_factory=dict)
    fire_time: float = 0.0

    def __post_init__(self):
        if not (self.vs > 0 and self.vb > self.vs):
            raise Subsonic(f"need vb > vs > 0, got vb={self.vb} vs={self.vs}")
        if not -90.0 < self.inclination_deg < 90.0:
            raise ValueError("inclination must be in (-90, 90) degrees")

    def trajectory_unit(self) -> np.ndarray:
        az = math.radians(self.azimuth_deg)
        incl = math.radians(self.inclination_deg)
        c = math.cos(incl)
        return np.array([c * math.sin(az), c * math.cos(az), math.sin(incl)])

    def to_dict(self) -> dict:
        return {
            "shooter": [self.shooter.east, self.shooter.north, self.shooter.up],
            "azimuth_deg": self.azimuth_deg,
            "inclination_deg": self.inclination_deg,
            "vb": self.vb,
            "vs": self.vs,
            "fire_time": self.fire_time,
            "cameras": {k: [p.east, p.north, p.up] for k, p in self.cameras.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        return cls(
            shooter=EnuPoint(*d["shooter"]),
            azimuth_deg=d["azimuth_deg"],
            inclination_deg=d["inclination_deg"],
            vb=d["vb"],
            vs=d["vs"],
            cameras={k: EnuPoint(*v) for k, v in d["cameras"].items()},
            fire_time=d.get("fire_time", 0.0),
        )


@dataclass(frozen=True)
class Arrival:
    cam_id: str
    distance: float  # 3D shooter-to-camera, m
    horizontal_distance: float  # same but ignoring the up component
    muzzle_time: float  # absolute, same clock as fire_time
    shock_time: float | None  # None when this camera never hears the shock
    tdiff: float | None  # muzzle_time - shock_time (positive: shock first)


def _cam_vec(scene: Scene, cam_id: str) -> np.ndarray:
    cam = scene.cameras[cam_id]
    return np.array(
        [
            cam.east - scene.shooter.east,
            cam.north - scene.shooter.north,
            cam.up - scene.shooter.up,
        ]
    )


def muzzle_arrival(scene: Scene, cam_id: str) -> float:
    return scene.fire_time + float(np.linalg.norm(_cam_vec(scene, cam_id))) / scene.vs


def shock_arrival(scene: Scene, cam_id: str) -> float | None:
    """First-arrival time of the ballistic shock, or None if unheard."""
    r = _cam_vec(scene, cam_id)
    u = scene.trajectory_unit()
    proj = float(r @ u)
    if proj <= MIN_DETACH_M:
        return None  # camera level with or behind the muzzle plane

    def travel(s: float) -> float:
        return s / scene.vb + float(np.linalg.norm(r - s * u)) / scene.vs

    res = minimize_scalar(travel, bounds=(0.0, proj), method="bounded", options={"xatol": 1e-10})
    s_best, t_best = float(res.x), float(res.fun)
    # the bounded minimizer stays sqrt(eps)*x away from the interval ends;
    # a head-on camera has its true minimum exactly at s = proj
    if travel(proj) <= t_best:
        s_best, t_best = proj, travel(proj)
    if travel(0.0) <= t_best:
        return None  # detaching immediately is optimal: that IS the muzzle blast
    if s_best <= MIN_DETACH_M:
        return None
    return scene.fire_time + t_best


def report(scene: Scene) -> dict[str, Arrival]:
    out: dict[str, Arrival] = {}
    for cam_id in scene.cameras:
        r = _cam_vec(scene, cam_id)
        dist = float(np.linalg.norm(r))
        mt = scene.fire_time + dist / scene.vs
        st = shock_arrival(scene, cam_id)
        out[cam_id] = Arrival(
            cam_id=cam_id,
            distance=dist,
            horizontal_distance=float(math.hypot(r[0], r[1])),
            muzzle_time=mt,
            shock_time=st,
            tdiff=None if st is None else mt - st,
        )
    return out


# random scenes with exact ground truth


@dataclass(frozen=True)
class SceneConstraints:
    n_cameras: int = 1
    vs_range: tuple[float, float] = (331.3, 346.0)
    mach_range: tuple[float, float] = (1.2, 3.0)  # vb / vs
    distance_range: tuple[float, float] = (50.0, 2000.0)
    alpha_deg_range: tuple[float, float] = (0.0, 15.0)
    inclination_deg_range: tuple[float, float] = (-10.0, 10.0)
    shooter_up_range: tuple[float, float] = (1.5, 2.0)
    camera_up: float | None = None  # pin all cameras to this height if set


@dataclass(frozen=True)
class CameraTruth:
    distance: float
    alpha_deg: float


def _perp_basis(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zhat = np.array([0.0, 0.0, 1.0])
    w1 = np.cross(u, zhat)
    n = np.linalg.norm(w1)
    if n < 1e-12:
        w1 = np.array([1.0, 0.0, 0.0])
    else:
        w1 = w1 / n
    w2 = np.cross(u, w1)
    return w1, w2


def generate_random_scene(
    seed: int, constraints: SceneConstraints = SceneConstraints()
) -> tuple[Scene, dict[str, CameraTruth]]:
    """Draw a scene where each camera's distance and miss angle from the
    trajectory are exact by construction, not measured after the fact.

    Cameras sit at shooter + d*(cos(a)*u + sin(a)*w) for a random roll
    of the perpendicular w. With camera_up set, the roll is solved so
    the camera lands at that height; draws with no solution are
    rejected and retried.
    """
    c = constraints
    rng = np.random.default_rng(seed)
    vs = rng.uniform(*c.vs_range)
    vb = vs * rng.uniform(*c.mach_range)
    shooter = EnuPoint(
        east=rng.uniform(-100.0, 100.0),
        north=rng.uniform(-100.0, 100.0),
        up=rng.uniform(*c.shooter_up_range),
    )
    azimuth = rng.uniform(0.0, 360.0)
    inclination = rng.uniform(*c.inclination_deg_range)
    scene_stub = Scene(
        shooter=shooter, azimuth_deg=azimuth, inclination_deg=inclination, vb=vb, vs=vs
    )
    u = scene_stub.trajectory_unit()
    w1, w2 = _perp_basis(u)

    s = np.array([shooter.east, shooter.north, shooter.up])
    cameras: dict[str, EnuPoint] = {}
    truth: dict[str, CameraTruth] = {}
    for i in range(c.n_cameras):
        for _ in range(10000):
            d = rng.uniform(*c.distance_range)
            alpha = math.radians(rng.uniform(*c.alpha_deg_range))
            if c.camera_up is None:
                phi = rng.uniform(0.0, 2.0 * math.pi)
            else:
                # need cos(a)*u_z + sin(a)*(cos(phi)*w1_z + sin(phi)*w2_z)
                # to equal (camera_up - shooter_up)/d
                target = (c.camera_up - s[2]) / d - math.cos(alpha) * u[2]
                a_coef = math.sin(alpha) * w1[2]
                b_coef = math.sin(alpha) * w2[2]
                amp = math.hypot(a_coef, b_coef)
                if amp < abs(target):
                    continue  # this (d, alpha) cannot reach the required height
                base = math.atan2(b_coef, a_coef)
                off = math.acos(max(-1.0, min(1.0, target / amp))) if amp > 0 else 0.0
                phi = base + (off if rng.integers(2) else -off)
            w = math.cos(phi) * w1 + math.sin(phi) * w2
            pos = s + d * (math.cos(alpha) * u + math.sin(alpha) * w)
            cam_id = f"cam{i + 1}"
            cameras[cam_id] = EnuPoint(east=pos[0], north=pos[1], up=pos[2])
            truth[cam_id] = CameraTruth(distance=d, alpha_deg=math.degrees(alpha))
            break
        else:
            raise ConstraintUnsatisfiable(
                f"no camera placement found for camera {i + 1} under {c}"
            )

    scene = Scene(
        shooter=shooter,
        azimuth_deg=azimuth,
        inclination_deg=inclination,
        vb=vb,
        vs=vs,
        cameras=cameras,
        fire_time=float(rng.uniform(0.0, 10.0)),
    )
    return scene, truth


# audio synthesis

SHOCK_TAU_S = 0.0003
MUZZLE_TAU_S = 0.002


def _impulse(n_samples: int, tau_s: float, rate: int, amp: float) -> np.ndarray:
    k = np.arange(n_samples)
    return amp * np.exp(-k / (tau_s * rate))


@dataclass(frozen=True, eq=False)
class AmbientTrack:
    """Diffuse background sound shared by every camera.

    Physically: distant broadband noise (wind, traffic, crowd) that
    reaches all microphones at effectively the same absolute time. This
    is what clock alignment by cross-correlation actually locks onto in
    field recordings, so synthetic clips need it too; the gunshot
    impulses alone arrive at different absolute times per camera and
    would drag a correlator toward propagation delays, not clocks."""

    samples: np.ndarray
    rate: int
    start: float  # absolute scene time of sample zero

    def slice_at(self, start: float, n: int) -> np.ndarray:
        """Ambient content for a clip of n samples beginning at absolute
        time start (zero-padded where the track runs out)."""
        k0 = int(round((start - self.start) * self.rate))
        out = np.zeros(n)
        lo = max(k0, 0)
        hi = min(k0 + n, len(self.samples))
        if hi > lo:
            out[lo - k0 : hi - k0] = self.samples[lo:hi]
        return out


def make_ambient(
    start: float, duration: float, rate: int = 44100, level_db: float = -30.0, seed: int = 0
) -> AmbientTrack:
    rng = np.random.default_rng(seed)
    n = int(round(duration * rate))
    return AmbientTrack(
        samples=rng.standard_normal(n) * 10.0 ** (level_db / 20.0), rate=rate, start=start
    )


def synthesize_audio(
    scene: Scene,
    cam_id: str,
    rate: int = 44100,
    noise_db: float = -40.0,
    start: float | None = None,
    duration: float | None = None,
    seed: int = 0,
    ambient: AmbientTrack | None = None,
) -> tuple[AudioClip, float]:
    """Render what one camera's microphone records: sensor noise, the
    shared ambient bed (if given), a sharp click for the shock (if
    heard), and a longer thump for the muzzle blast, at the sample
    positions implied by the clip start.

    Returns (clip, start) where start is the absolute scene time of
    sample zero. Defaults put the clip start half a second before the
    trigger pull.
    """
    arr = report(scene)[cam_id]
    if start is None:
        start = scene.fire_time - 0.5
    events = [(arr.muzzle_time, MUZZLE_TAU_S, 0.7)]
    if arr.shock_time is not None:
        events.append((arr.shock_time, SHOCK_TAU_S, 0.9))
    if duration is None:
        duration = max(t for t, _, _ in events) - start + 0.5
    n = int(round(duration * rate))
    if n < 1:
        raise ValueError("clip would be empty; check start/duration")

    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n) * 10.0 ** (noise_db / 20.0)
    if ambient is not None:
        if ambient.rate != rate:
            raise ValueError(f"ambient rate {ambient.rate} != clip rate {rate}")
        y += ambient.slice_at(start, n)
    for t, tau, amp in events:
        i = int(round((t - start) * rate))
        if i < 0 or i >= n:
            continue  # event falls outside this recording
        k = min(n - i, int(round(6 * tau * rate)) + 1)
        y[i : i + k] += _impulse(k, tau, rate, amp)
    return AudioClip(samples=np.clip(y, -1.0, 1.0), rate=rate, source_video=cam_id), start
