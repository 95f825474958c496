"""Combine per-camera distance rings and per-pair bearing bands on a
shared map grid and find where they agree.

Every estimate becomes a raster layer of scores in [0, 1] over the
same grid. Ring layers carry the Monte Carlo distance density around
one camera; band layers carry a triangular profile across one camera
pair's hyperbolic corridor. Fusing multiplies the layers cell by cell
(a cell any single constraint rules out is ruled out, period); sum
mode averages instead, useful when one marking might be garbage and a
veto is too strong. The hottest connected region of the fused surface
is the answer handed to the map.

Grid rows run south to north, columns west to east, values row-major,
scores at cell centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from shapely.geometry import MultiPolygon, box
from shapely.ops import unary_union

from .ballistics import DistanceEstimate
from .errors import AllZero, EmptyEstimate, GridMismatch
from .geo import EnuPoint
from .tdoa import HyperbolaBand

MAX_CELLS = 4_000_000
# narrower than 3/4 of a cell, a ring or band could slip between cell
# centers and rasterize to nothing; clamp profile half-widths up
MIN_HALFWIDTH_CELLS = 0.75


@dataclass(frozen=True)
class GridSpec:
    east_min: float
    north_min: float
    east_max: float
    north_max: float
    cell_m: float = 5.0

    def __post_init__(self):
        if not (self.east_max > self.east_min and self.north_max > self.north_min):
            raise ValueError("grid extents must be nonempty")
        if self.cell_m <= 0:
            raise ValueError("cell size must be positive")
        if self.rows * self.cols > MAX_CELLS:
            raise ValueError(
                f"{self.rows}x{self.cols} cells exceeds the {MAX_CELLS} cap; "
                "coarsen cell_m or shrink the extent"
            )

    @property
    def rows(self) -> int:
        return max(1, int(math.ceil((self.north_max - self.north_min) / self.cell_m)))

    @property
    def cols(self) -> int:
        return max(1, int(math.ceil((self.east_max - self.east_min) / self.cell_m)))

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(east, north) cell-center coordinate arrays, shape (rows, cols)."""
        e = self.east_min + (np.arange(self.cols) + 0.5) * self.cell_m
        n = self.north_min + (np.arange(self.rows) + 0.5) * self.cell_m
        return np.broadcast_to(e, (self.rows, self.cols)), np.broadcast_to(
            n[:, None], (self.rows, self.cols)
        )

    @classmethod
    def around(cls, points: list[EnuPoint], margin: float, cell_m: float = 5.0) -> "GridSpec":
        if not points:
            raise EmptyEstimate("no points to build a grid around")
        es = [p.east for p in points]
        ns = [p.north for p in points]
        return cls(
            east_min=min(es) - margin,
            north_min=min(ns) - margin,
            east_max=max(es) + margin,
            north_max=max(ns) + margin,
            cell_m=cell_m,
        )


@dataclass(frozen=True, eq=False)
class Layer:
    spec: GridSpec
    values: np.ndarray  # (rows, cols) in [0, 1]
    kind: str  # "annulus" or "band"
    source: str  # provenance label, e.g. camera or pair id


def ring_density(estimate: DistanceEstimate, bins: int = 64) -> np.ndarray:
    """Max-normalized histogram of the feasible horizontal distances on
    [dh_min, dh_max]. This is the compact, storable form of an estimate's
    shape; a ring layer can be rebuilt from it without the samples."""
    counts, _ = np.histogram(
        estimate.dh_samples, bins=bins, range=(estimate.dh_min, estimate.dh_max)
    )
    return counts / counts.max()


def layer_from_ring_density(
    spec: GridSpec,
    center: EnuPoint,
    lo: float,
    hi: float,
    density: np.ndarray,
    source: str = "",
) -> Layer:
    """Ring layer from a precomputed radial density over [lo, hi]."""
    if hi < lo:
        raise ValueError(f"ring bounds reversed: {lo} > {hi}")
    ee, nn = spec.centers()
    dist = np.hypot(ee - center.east, nn - center.north)

    width = hi - lo
    min_width = 2.0 * MIN_HALFWIDTH_CELLS * spec.cell_m
    if width < min_width:
        # ring thinner than the raster: widen the acceptance window so it
        # cannot fall between cell centers, flat profile
        pad = 0.5 * (min_width - width)
        values = ((dist >= lo - pad) & (dist <= hi + pad)).astype(float)
        return Layer(spec=spec, values=values, kind="annulus", source=source)

    density = np.asarray(density, dtype=float)
    bins = len(density)
    edges = np.linspace(lo, hi, bins + 1)
    inside = (dist >= lo) & (dist <= hi)
    idx = np.clip(np.searchsorted(edges, dist, side="right") - 1, 0, bins - 1)
    values = np.where(inside, density[idx], 0.0)
    return Layer(spec=spec, values=values, kind="annulus", source=source)


def layer_from_annulus(
    spec: GridSpec, center: EnuPoint, estimate: DistanceEstimate, bins: int = 64, source: str = ""
) -> Layer:
    """Score cells by how often the Monte Carlo sweep produced their
    distance from the camera. Zero outside [dh_min, dh_max]."""
    if estimate.dh_max - estimate.dh_min < 2.0 * MIN_HALFWIDTH_CELLS * spec.cell_m:
        density = np.ones(1)
    else:
        density = ring_density(estimate, bins)
    return layer_from_ring_density(
        spec, center, estimate.dh_min, estimate.dh_max, density, source=source
    )


def layer_from_band(spec: GridSpec, band: HyperbolaBand, source: str = "") -> Layer:
    """Triangular score across the pair's range-difference corridor,
    peaking on the center line and fading to zero at the envelope."""
    ee, nn = spec.centers()
    d_far = np.hypot(ee - band.far.east, nn - band.far.north)
    d_near = np.hypot(ee - band.near.east, nn - band.near.north)
    delta = d_far - d_near  # positive on the shooter's side

    floor = MIN_HALFWIDTH_CELLS * spec.cell_m
    if band.degenerate:
        # no arrival order: straddle the bisector symmetrically
        center = 0.0
        left = right = max(band.two_a_upper, floor)
    else:
        center = band.two_a_center
        left = max(center - band.two_a_lower, floor)
        right = max(band.two_a_upper - center, floor)

    values = np.where(
        delta <= center,
        1.0 - (center - delta) / left,
        1.0 - (delta - center) / right,
    )
    return Layer(spec=spec, values=np.maximum(values, 0.0), kind="band", source=source)


@dataclass(frozen=True, eq=False)
class Heatmap:
    spec: GridSpec
    values: np.ndarray  # max-normalized to peak 1.0
    mode: str
    sources: tuple[str, ...]


def fuse(layers: list[Layer], mode: str = "product") -> Heatmap:
    if not layers:
        raise EmptyEstimate("nothing to fuse")
    if mode not in ("product", "sum"):
        raise ValueError(f"unknown fuse mode {mode!r}")
    spec = layers[0].spec
    for layer in layers[1:]:
        if layer.spec != spec:
            raise GridMismatch(f"layer grids differ: {layer.spec} vs {spec}")
    stack = np.stack([layer.values for layer in layers])
    fused = stack.prod(axis=0) if mode == "product" else stack.mean(axis=0)
    peak = fused.max()
    if peak <= 0.0:
        raise AllZero(
            "constraints share no common ground; a marking or a camera "
            "position is likely wrong"
        )
    return Heatmap(
        spec=spec,
        values=fused / peak,
        mode=mode,
        sources=tuple(f"{layer.kind}:{layer.source}" for layer in layers),
    )


@dataclass(frozen=True)
class ArgmaxRegion:
    centroid: EnuPoint
    exterior: list[EnuPoint]  # CCW boundary of the hot region
    holes: list[list[EnuPoint]]
    n_cells: int
    threshold: float


def argmax_region(heatmap: Heatmap, frac: float = 0.9) -> ArgmaxRegion:
    """Connected cluster of cells scoring within frac of the peak,
    around the peak itself. Centroid is the unweighted mean of member
    cell centers; the polygon is the union of their cell squares."""
    if not 0.0 < frac <= 1.0:
        raise ValueError("frac must be in (0, 1]")
    v = heatmap.values
    mask = v >= frac * v.max()
    labels, _ = ndimage.label(mask)
    r0, c0 = np.unravel_index(int(np.argmax(v)), v.shape)
    region = labels == labels[r0, c0]

    ee, nn = heatmap.spec.centers()
    centroid = EnuPoint(east=float(ee[region].mean()), north=float(nn[region].mean()))

    s = heatmap.spec
    rows, cols = np.nonzero(region)
    cells = [
        box(
            s.east_min + c * s.cell_m,
            s.north_min + r * s.cell_m,
            s.east_min + (c + 1) * s.cell_m,
            s.north_min + (r + 1) * s.cell_m,
        )
        for r, c in zip(rows, cols)
    ]
    merged = unary_union(cells)
    if isinstance(merged, MultiPolygon):  # defensive: label() made it connected
        merged = max(merged.geoms, key=lambda g: g.area)

    def ring(coords):
        return [EnuPoint(east=float(x), north=float(y)) for x, y in coords]

    exterior = ring(merged.exterior.coords)
    holes = [ring(interior.coords) for interior in merged.interiors]
    return ArgmaxRegion(
        centroid=centroid,
        exterior=exterior,
        holes=holes,
        n_cells=int(region.sum()),
        threshold=frac,
    )


def heatmap_meta(heatmap: Heatmap) -> dict:
    """Header fields for dumping a heatmap as a text grid."""
    s = heatmap.spec
    return {
        "east_min": "%.9g" % s.east_min,
        "north_min": "%.9g" % s.north_min,
        "cell_m": "%.9g" % s.cell_m,
        "mode": heatmap.mode,
    }
