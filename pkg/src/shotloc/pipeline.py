"""Operations that tie the math modules to stored collections.

Everything here works on a Store and a collection id, reads what it
needs from the document, runs the appropriate estimator, and writes an
estimate record (and artifacts) back. The command line and the HTTP
service both call these functions, so a result is the same object no
matter which door it came through.

All estimators accept a progress callback (fraction in [0, 1]); the
service forwards it to job status, the CLI ignores it.
"""

from __future__ import annotations

import hashlib
import io
import itertools
import math

import numpy as np
from scipy.io import wavfile

from . import fusion, geo
from .audio import AudioClip, detect_transients, load_wav, spectrogram
from .ballistics import Method1Inputs, estimate_method1
from .errors import DataError, EmptyEstimate, IntegrityViolation, NotFound
from .geo import EnuPoint, GeoPoint, LocalFrame, from_enu, to_enu
from .griddump import dump_text
from .oracle import Scene, make_ambient, report, synthesize_audio
from .store import Store
from .sync import PairwiseOffset, aggregate_timeline, estimate_offset
from .tdoa import HyperbolaBand, compute_band, band_polylines


def _noop_progress(_frac: float) -> None:
    pass


# frame and position plumbing


def collection_frame(doc: dict) -> LocalFrame:
    fo = doc.get("frame_origin")
    if not fo:
        raise IntegrityViolation(
            f"collection {doc['id']} has no frame origin; set one before estimating"
        )
    return LocalFrame(origin=GeoPoint(fo["lat"], fo["lon"], fo.get("elev", 0.0)))


def video_enu(frame: LocalFrame, video: dict) -> EnuPoint:
    pos = video.get("position")
    if not pos:
        raise IntegrityViolation(f"video {video['id']} has no position")
    return to_enu(frame, GeoPoint(pos["lat"], pos["lon"], pos.get("elev", 0.0)))


def _get_video(doc: dict, vid: str) -> dict:
    for v in doc["videos"]:
        if v["id"] == vid:
            return v
    raise NotFound(f"video {vid!r} not in collection {doc['id']}")


# ingest


def clip_to_wav_bytes(clip: AudioClip) -> bytes:
    buf = io.BytesIO()
    wavfile.write(buf, clip.rate, clip.samples.astype(np.float32))
    return buf.getvalue()


def ingest_clip(
    store: Store,
    cid: str,
    clip: AudioClip,
    name: str,
    fps: float = 30.0,
    position: dict | None = None,
) -> dict:
    """Register a recording and stash its audio as a collection artifact."""
    _, video = store.add_video(
        cid, name=name, fps=fps, duration=clip.duration, position=position
    )
    artifact = f"{video['id']}.wav"
    store.put_artifact(cid, artifact, clip_to_wav_bytes(clip))
    store.update_video(cid, video["id"], audio=artifact)
    video = dict(video, audio=artifact)
    return video


def ingest_wav(
    store: Store,
    cid: str,
    wav_path,
    name: str | None = None,
    fps: float = 30.0,
    position: dict | None = None,
) -> dict:
    clip = load_wav(wav_path)
    label = name or str(wav_path).rsplit("/", 1)[-1]
    return ingest_clip(store, cid, clip, name=label, fps=fps, position=position)


def load_video_clip(store: Store, cid: str, vid: str) -> AudioClip:
    doc = store.get_collection(cid)
    video = _get_video(doc, vid)
    if not video.get("audio"):
        raise DataError(f"video {vid} has no audio artifact")
    data = store.get_artifact(cid, video["audio"])
    return load_wav(io.BytesIO(data), source_video=vid)


# marking aids


def spectrogram_grid(clip: AudioClip, window: int = 1024, hop: int = 256):
    """(values, meta) pair ready for the shared grid dump format."""
    spec = spectrogram(clip, window=window, hop=hop)
    meta = {
        "kind": "spectrogram",
        "rate": spec.rate,
        "window": spec.window,
        "hop": spec.hop,
        "unit": "dBFS",
    }
    return spec.magnitudes_db, meta


def suggest_marks(
    store: Store,
    cid: str,
    vid: str,
    ratio_db: float = 12.0,
    min_sep_ms: float = 50.0,
) -> list[dict]:
    clip = load_video_clip(store, cid, vid)
    return [
        {"t": c.time, "score_db": c.score_db}
        for c in detect_transients(clip, ratio_db=ratio_db, min_sep_ms=min_sep_ms)
    ]


def auto_mark(
    store: Store,
    cid: str,
    vid: str,
    event: int = 0,
    ratio_db: float = 12.0,
    min_sep_ms: float = 50.0,
) -> list[dict]:
    """Mark the two strongest transients as shock then muzzle (the crack
    always lands first); a single transient is taken as muzzle only.
    Convenience for synthetic runs; field work wants human eyes."""
    cands = suggest_marks(store, cid, vid, ratio_db=ratio_db, min_sep_ms=min_sep_ms)
    if not cands:
        raise DataError(f"no transients stand out in {vid}; mark manually")
    top = sorted(cands, key=lambda c: -c["score_db"])[:2]
    top.sort(key=lambda c: c["t"])
    if len(top) == 1:
        marks = [{"kind": "muzzle", "t": top[0]["t"], "event": event}]
    else:
        marks = [
            {"kind": "shock", "t": top[0]["t"], "event": event},
            {"kind": "muzzle", "t": top[1]["t"], "event": event},
        ]
    store.set_markings(cid, vid, marks)
    return marks


def _mark_time(video: dict, kind: str, event: int) -> float:
    for m in video["markings"]:
        if m["kind"] == kind and m.get("event", 0) == event:
            return m["t"]
    raise DataError(f"video {video['id']} has no {kind} mark for event {event}")


# sync


def sync_collection(
    store: Store,
    cid: str,
    max_shift_s: float | None = None,
    anchor: str | None = None,
    manual: list[PairwiseOffset] = (),
    progress=_noop_progress,
) -> dict:
    """Correlate every pair of recordings, fit the global timeline, and
    persist each video's start plus a sync estimate record."""
    doc = store.get_collection(cid)
    with_audio = [v["id"] for v in doc["videos"] if v.get("audio")]
    ids = sorted(set(with_audio) | {x for o in manual for x in (o.i, o.j)})
    if len(ids) < 2:
        raise DataError("need at least two recordings to synchronize")

    clips = {vid: load_video_clip(store, cid, vid) for vid in with_audio}
    pairs = list(itertools.combinations(with_audio, 2))
    offsets: list[PairwiseOffset] = []
    for k, (i, j) in enumerate(pairs):
        offsets.append(estimate_offset(clips[i], clips[j], max_shift_s=max_shift_s))
        progress(0.9 * (k + 1) / max(len(pairs), 1))
    offsets.extend(manual)

    timeline = aggregate_timeline(ids, offsets, anchor=anchor)
    for vid, start in timeline.starts.items():
        store.update_video(cid, vid, start=start)

    result = {
        "starts": {k: round(v, 9) for k, v in timeline.starts.items()},
        "anchor": timeline.anchor,
        "max_residual": timeline.max_residual,
        "components": [sorted(c) for c in timeline.components],
        "low_confidence_pairs": [list(p) for p in timeline.low_confidence_pairs],
        "offsets": [
            {
                "i": o.i,
                "j": o.j,
                "offset": round(o.offset, 9),
                "confidence": round(o.confidence, 6),
                "method": o.method,
            }
            for o in offsets
        ],
    }
    _, record = store.add_estimate(
        cid, "sync", params={"max_shift_s": max_shift_s, "anchor": anchor}, inputs=ids,
        result=result,
    )
    progress(1.0)
    return record


# method 1: distance ring per camera


def estimate_m1(
    store: Store,
    cid: str,
    vid: str,
    event: int = 0,
    vs_range: tuple[float, float] = (331.3, 346.0),
    vb_range: tuple[float, float] = (400.0, 1000.0),
    alpha_deg_range: tuple[float, float] = (0.0, 15.0),
    elevation_diff: float = 0.0,
    n_samples: int = 10000,
    seed: int = 0,
    progress=_noop_progress,
) -> dict:
    doc = store.get_collection(cid)
    video = _get_video(doc, vid)
    t_shock = _mark_time(video, "shock", event)
    t_muzzle = _mark_time(video, "muzzle", event)
    inputs = Method1Inputs(
        tdiff=t_muzzle - t_shock,
        vs_range=tuple(vs_range),
        vb_range=tuple(vb_range),
        alpha_deg_range=tuple(alpha_deg_range),
        elevation_diff=elevation_diff,
        n_samples=n_samples,
    )
    progress(0.1)
    est = estimate_method1(inputs, seed=seed)
    progress(0.8)
    result = {
        "tdiff": inputs.tdiff,
        "elevation_diff": elevation_diff,
        "slant": {"min": est.slant_min, "max": est.slant_max, "mean": est.slant_mean},
        "dh": {"min": est.dh_min, "max": est.dh_max, "mean": est.dh_mean},
        "density": [round(float(x), 6) for x in fusion.ring_density(est)],
        "n_feasible": est.n_feasible,
        "n_requested": est.n_requested,
    }
    _, record = store.add_estimate(
        cid,
        "m1",
        params={
            "event": event,
            "vs_range": list(vs_range),
            "vb_range": list(vb_range),
            "alpha_deg_range": list(alpha_deg_range),
            "elevation_diff": elevation_diff,
            "n_samples": n_samples,
            "seed": seed,
        },
        inputs=[vid],
        result=result,
    )
    progress(1.0)
    return record


# method 2: hyperbola band per camera pair


def estimate_m2(
    store: Store,
    cid: str,
    vid_i: str,
    vid_j: str,
    event: int = 0,
    vs_range: tuple[float, float] = (331.3, 346.0),
    jitter_s: float = 0.033,
    legacy_center: bool = False,
    progress=_noop_progress,
) -> dict:
    doc = store.get_collection(cid)
    frame = collection_frame(doc)
    videos = {vid: _get_video(doc, vid) for vid in (vid_i, vid_j)}
    arrivals = {}
    cams = {}
    for vid, video in videos.items():
        if video.get("start") is None:
            raise DataError(f"video {vid} has no timeline start; run sync first")
        arrivals[vid] = video["start"] + _mark_time(video, "muzzle", event)
        cams[vid] = video_enu(frame, video)
    progress(0.3)
    band = compute_band(
        arrivals[vid_i],
        arrivals[vid_j],
        cams[vid_i],
        cams[vid_j],
        vs_range=tuple(vs_range),
        jitter_s=jitter_s,
        legacy_center=legacy_center,
    )
    near_vid = vid_i if cams[vid_i] == band.near else vid_j
    far_vid = vid_j if near_vid == vid_i else vid_i
    result = {
        "near": near_vid,
        "far": far_vid,
        "separation": band.separation,
        "delta_t": band.delta_t,
        "two_a": {
            "lower": band.two_a_lower,
            "center": band.two_a_center,
            "upper": band.two_a_upper,
        },
        "degenerate": band.degenerate,
        "infeasible_lines": list(band.infeasible_lines),
    }
    _, record = store.add_estimate(
        cid,
        "m2",
        params={
            "event": event,
            "vs_range": list(vs_range),
            "jitter_s": jitter_s,
            "legacy_center": legacy_center,
        },
        inputs=[vid_i, vid_j],
        result=result,
    )
    progress(1.0)
    return record


def _band_from_record(doc: dict, frame: LocalFrame, record: dict) -> HyperbolaBand:
    r = record["result"]
    near = video_enu(frame, _get_video(doc, r["near"]))
    far = video_enu(frame, _get_video(doc, r["far"]))
    de, dn = far.east - near.east, far.north - near.north
    return HyperbolaBand(
        near=near,
        far=far,
        separation=float(math.hypot(de, dn)),
        delta_t=r["delta_t"],
        two_a_lower=r["two_a"]["lower"],
        two_a_center=r["two_a"]["center"],
        two_a_upper=r["two_a"]["upper"],
        degenerate=r["degenerate"],
        infeasible_lines=tuple(r["infeasible_lines"]),
    )


# fusion


def _select_records(doc: dict, kind: str, ids: list[str] | None) -> list[dict]:
    if ids is None:
        # default: the latest record per distinct input set
        latest: dict[tuple, dict] = {}
        for rec in doc["estimates"]:
            if rec["kind"] == kind:
                latest[tuple(rec["inputs"])] = rec
        return sorted(latest.values(), key=lambda r: r["id"])
    out = []
    for eid in ids:
        matches = [r for r in doc["estimates"] if r["id"] == eid]
        if not matches:
            raise NotFound(f"estimate {eid!r} not in collection {doc['id']}")
        if matches[0]["kind"] != kind:
            raise DataError(f"estimate {eid} is {matches[0]['kind']!r}, expected {kind!r}")
        out.append(matches[0])
    return out


def fuse_collection(
    store: Store,
    cid: str,
    m1_ids: list[str] | None = None,
    m2_ids: list[str] | None = None,
    cell_m: float | None = None,
    margin: float | None = None,
    mode: str = "product",
    frac: float = 0.9,
    progress=_noop_progress,
) -> dict:
    """Rasterize the chosen (default: all latest) ring and band
    estimates, fuse them, cut the hot region, and persist a fuse record
    plus the full heatmap as a grid-dump artifact.

    cell_m=None means 5 m, coarsened just enough to respect the grid's
    cell budget on sprawling scenes; an explicit cell_m is binding."""
    doc = store.get_collection(cid)
    frame = collection_frame(doc)
    m1_recs = _select_records(doc, "m1", m1_ids)
    m2_recs = _select_records(doc, "m2", m2_ids)
    if not m1_recs and not m2_recs:
        raise EmptyEstimate("no ring or band estimates to fuse")

    cams: list[EnuPoint] = []
    for rec in m1_recs:
        cams.append(video_enu(frame, _get_video(doc, rec["inputs"][0])))
    for rec in m2_recs:
        for vid in rec["inputs"]:
            cams.append(video_enu(frame, _get_video(doc, vid)))
    if margin is None:
        reach = [rec["result"]["dh"]["max"] for rec in m1_recs]
        margin = 1.1 * max(reach) if reach else 1000.0
    if cell_m is None:
        es = [c.east for c in cams]
        ns = [c.north for c in cams]
        area = (max(es) - min(es) + 2 * margin) * (max(ns) - min(ns) + 2 * margin)
        cell_m = max(5.0, math.sqrt(area / (0.98 * fusion.MAX_CELLS)))
    spec = fusion.GridSpec.around(cams, margin=margin, cell_m=cell_m)

    layers = []
    total = len(m1_recs) + len(m2_recs)
    done = 0
    for rec in m1_recs:
        video = _get_video(doc, rec["inputs"][0])
        r = rec["result"]
        layers.append(
            fusion.layer_from_ring_density(
                spec,
                video_enu(frame, video),
                r["dh"]["min"],
                r["dh"]["max"],
                np.array(r["density"], dtype=float),
                source=rec["id"],
            )
        )
        done += 1
        progress(0.7 * done / total)
    for rec in m2_recs:
        band = _band_from_record(doc, frame, rec)
        layers.append(fusion.layer_from_band(spec, band, source=rec["id"]))
        done += 1
        progress(0.7 * done / total)

    heat = fusion.fuse(layers, mode=mode)
    region = fusion.argmax_region(heat, frac=frac)
    progress(0.9)

    meta = fusion.heatmap_meta(heat)
    meta["sources"] = ",".join(heat.sources)
    blob = dump_text(heat.values, meta).encode()
    artifact = f"heat-{hashlib.sha1(blob).hexdigest()[:12]}.txt"
    store.put_artifact(cid, artifact, blob)

    centroid_geo = from_enu(frame, region.centroid)
    result = {
        "centroid_enu": [round(region.centroid.east, 3), round(region.centroid.north, 3)],
        "centroid": {
            "lat": round(centroid_geo.lat, geo.GEOJSON_DECIMALS),
            "lon": round(centroid_geo.lon, geo.GEOJSON_DECIMALS),
        },
        "region": {
            "n_cells": region.n_cells,
            "threshold": region.threshold,
            "exterior_enu": [[round(p.east, 3), round(p.north, 3)] for p in region.exterior],
        },
        "grid": {
            "east_min": spec.east_min,
            "north_min": spec.north_min,
            "cell_m": spec.cell_m,
            "rows": spec.rows,
            "cols": spec.cols,
            "mode": mode,
        },
        "heatmap_artifact": artifact,
        "m1": [r["id"] for r in m1_recs],
        "m2": [r["id"] for r in m2_recs],
    }
    _, record = store.add_estimate(
        cid,
        "fuse",
        params={"cell_m": cell_m, "margin": margin, "mode": mode, "frac": frac},
        inputs=sorted({v for rec in m1_recs + m2_recs for v in rec["inputs"]}),
        result=result,
    )
    progress(1.0)
    return record


# rendering to GeoJSON


def render_features(store: Store, cid: str, estimate_ids: list[str] | None = None) -> dict:
    """FeatureCollection for the requested estimates (default: latest of
    each kind), plus camera markers."""
    doc = store.get_collection(cid)
    frame = collection_frame(doc)
    features: list[dict] = []

    for video in doc["videos"]:
        if video.get("position"):
            features.append(
                geo.point_feature(
                    frame,
                    video_enu(frame, video),
                    properties={"kind": "camera", "video": video["id"], "name": video["name"]},
                )
            )

    if estimate_ids is None:
        chosen = _select_records(doc, "m1", None) + _select_records(doc, "m2", None)
        fuse_recs = [r for r in doc["estimates"] if r["kind"] == "fuse"]
        if fuse_recs:
            chosen.append(fuse_recs[-1])
    else:
        chosen = []
        for eid in estimate_ids:
            match = [r for r in doc["estimates"] if r["id"] == eid]
            if not match:
                raise NotFound(f"estimate {eid!r} not in collection {cid}")
            chosen.append(match[0])

    for rec in chosen:
        features.extend(_estimate_features(doc, frame, rec))
    return geo.feature_collection(features)


def _estimate_features(doc: dict, frame: LocalFrame, rec: dict) -> list[dict]:
    r = rec["result"]
    props = {"estimate": rec["id"], "kind": rec["kind"]}
    if rec["kind"] == "m1":
        video = _get_video(doc, rec["inputs"][0])
        return [
            geo.annulus_feature(
                frame,
                video_enu(frame, video),
                r["dh"]["min"],
                r["dh"]["max"],
                properties={**props, "video": video["id"], "dh_mean": r["dh"]["mean"]},
            )
        ]
    if rec["kind"] == "m2":
        band = _band_from_record(doc, frame, rec)
        # draw the branch out to the scale of the ring estimates if any
        m1_reach = [e["result"]["dh"]["max"] for e in doc["estimates"] if e["kind"] == "m1"]
        extent = 2.0 * max(m1_reach) if m1_reach else 4000.0
        out = []
        for role, pts in band_polylines(band, extent=extent).items():
            out.append(
                geo.polyline_feature(
                    frame, pts, properties={**props, "role": role, "pair": rec["inputs"]}
                )
            )
        return out
    if rec["kind"] == "fuse":
        exterior = [EnuPoint(e, n) for e, n in r["region"]["exterior_enu"]]
        return [
            geo.polygon_feature(frame, exterior, properties={**props, "role": "argmax"}),
            geo.point_feature(
                frame,
                EnuPoint(*r["centroid_enu"]),
                properties={**props, "role": "centroid"},
            ),
        ]
    if rec["kind"] == "sync":
        return []
    return []


# simulation


def simulate_scene(
    store: Store,
    scene: Scene,
    name: str = "synthetic scene",
    frame_origin: dict | None = None,
    seed: int = 0,
    noise_db: float = -40.0,
    ambient_db: float = -30.0,
    fps: float = 30.0,
    rate: int = 44100,
) -> tuple[str, dict]:
    """Create a collection out of a planted scene: per-camera WAVs with
    staggered starts over a shared ambient bed, camera positions in
    geographic coordinates, and a truth sidecar for validation.

    Returns (collection id, truth dict). The truth never enters the
    collection; estimates must rediscover it from the audio."""
    fo = frame_origin or {"lat": 36.09, "lon": -115.17, "elev": 0.0}
    doc = store.create_collection(name, frame_origin=fo)
    cid = doc["id"]
    frame = LocalFrame(origin=GeoPoint(fo["lat"], fo["lon"], fo.get("elev", 0.0)))

    arrivals = report(scene)
    last_event = max(
        [a.muzzle_time for a in arrivals.values()]
        + [a.shock_time for a in arrivals.values() if a.shock_time is not None]
    )
    rng = np.random.default_rng(seed)
    ambient = make_ambient(
        start=scene.fire_time - 4.0,
        duration=(last_event - scene.fire_time) + 6.0,
        rate=rate,
        level_db=ambient_db,
        seed=seed,
    )

    truth: dict = {
        "scene": scene.to_dict(),
        "cameras": {},
        "fire_time": scene.fire_time,
    }
    for k, (cam_id, cam) in enumerate(sorted(scene.cameras.items())):
        start = scene.fire_time - float(rng.uniform(0.8, 2.5))
        duration = (last_event - start) + 1.0
        clip, start = synthesize_audio(
            scene,
            cam_id,
            rate=rate,
            noise_db=noise_db,
            start=start,
            duration=duration,
            seed=seed + 1 + k,
            ambient=ambient,
        )
        gp = from_enu(frame, cam)
        video = ingest_clip(
            store,
            cid,
            clip,
            name=cam_id,
            fps=fps,
            position={"lat": gp.lat, "lon": gp.lon, "elev": gp.elev},
        )
        arr = arrivals[cam_id]
        truth["cameras"][video["id"]] = {
            "scene_camera": cam_id,
            "start": start,
            "enu": [cam.east, cam.north, cam.up],
            "distance": arr.distance,
            "horizontal_distance": arr.horizontal_distance,
            "muzzle_time": arr.muzzle_time,
            "shock_time": arr.shock_time,
            "tdiff": arr.tdiff,
        }
    shooter_geo = from_enu(frame, scene.shooter)
    truth["shooter"] = {
        "enu": [scene.shooter.east, scene.shooter.north, scene.shooter.up],
        "lat": shooter_geo.lat,
        "lon": shooter_geo.lon,
        "elev": shooter_geo.elev,
    }
    return cid, truth
