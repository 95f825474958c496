"""Headless driver for the whole pipeline.

Every compute path is reachable from here without the service or the
UI. Outputs are deterministic for fixed seeds: JSON is emitted with
sorted keys, GeoJSON coordinates are rounded by the geo module, and
grid dumps use a fixed float format, so golden-file diffs are stable.

Exit codes: 0 success, 1 bad input, 2 infeasible result, 3 broken
file or I/O. Pass --json to get machine-readable errors on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import pipeline
from .audio import detect_transients, load_wav
from .ballistics import Method1Inputs, estimate_method1
from .errors import ShotlocError
from .geo import EnuPoint
from .griddump import write_griddump
from .oracle import SceneConstraints, generate_random_scene
from .store import Store
from .tdoa import compute_band

DEFAULT_DATA_DIR = "shotloc-data"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors, but exit 2 is reserved for
    infeasible results here; route usage errors through the normal
    error path (exit 1) instead."""

    def error(self, message):
        raise ShotlocError(message)


# flag parsing helpers


def _range(text: str) -> tuple[float, float]:
    """min:max, or a single value for a degenerate range."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v)
        if len(parts) == 2:
            lo, hi = float(parts[0]), float(parts[1])
            if lo > hi:
                raise argparse.ArgumentTypeError(f"range {text!r} has min > max")
            return (lo, hi)
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}")


def _latlon(text: str) -> dict:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected LAT,LON[,ELEV], got {text!r}")
    try:
        out = {"lat": float(parts[0]), "lon": float(parts[1])}
        out["elev"] = float(parts[2]) if len(parts) == 3 else 0.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LAT,LON[,ELEV], got {text!r}")
    return out


def _enu(text: str) -> EnuPoint:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected EAST,NORTH[,UP] meters, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected EAST,NORTH[,UP] meters, got {text!r}")
    return EnuPoint(vals[0], vals[1], vals[2] if len(vals) == 3 else 0.0)


def _manual_pair(tokens: list[str]):
    out = []
    for tok in tokens:
        vid, _, frame = tok.partition(":")
        if not vid or not frame:
            raise ShotlocError(f"--manual wants VIDEO:FRAME tokens, got {tok!r}")
        try:
            out.append((vid, float(frame)))
        except ValueError:
            raise ShotlocError(f"frame in {tok!r} is not a number")
    return out


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _store(args) -> Store:
    return Store(args.data_dir)


# subcommand bodies


def cmd_ingest(args) -> int:
    store = _store(args)
    if args.create is not None:
        doc = store.create_collection(args.create, frame_origin=args.frame_origin)
        cid = doc["id"]
    else:
        if not args.collection:
            raise ShotlocError("pass --collection ID or --create NAME")
        cid = args.collection
    video = pipeline.ingest_wav(
        store, cid, args.wav, name=args.name, fps=args.fps, position=args.position
    )
    _emit({"collection": cid, "video": video}, None)
    return 0


def _clip_from_args(args):
    if args.wav:
        return load_wav(args.wav)
    if args.collection and args.video:
        return pipeline.load_video_clip(_store(args), args.collection, args.video)
    raise ShotlocError("pass --wav FILE or --collection ID --video ID")


def cmd_spectrogram(args) -> int:
    clip = _clip_from_args(args)
    values, meta = pipeline.spectrogram_grid(clip, window=args.window, hop=args.hop)
    write_griddump(args.out, values, meta)
    _emit({"out": str(args.out), "rows": values.shape[0], "cols": values.shape[1]}, None)
    return 0


def cmd_detect(args) -> int:
    clip = _clip_from_args(args)
    cands = detect_transients(clip, ratio_db=args.ratio_db, min_sep_ms=args.min_sep_ms)
    _emit(
        {"candidates": [{"t": round(c.time, 6), "score_db": round(c.score_db, 3)} for c in cands]},
        None,
    )
    return 0


def cmd_sync(args) -> int:
    store = _store(args)
    manual = []
    doc = store.get_collection(args.collection)
    fps = {v["id"]: v["fps"] for v in doc["videos"]}
    from .sync import refine_manual

    for pair in args.manual or []:
        (vi, fi), (vj, fj) = _manual_pair(pair)
        for vid in (vi, vj):
            if vid not in fps:
                raise ShotlocError(f"video {vid!r} not in collection {args.collection}")
        manual.append(refine_manual(vi, vj, fi, fj, fps[vi], fps[vj]))
    rec = pipeline.sync_collection(
        store,
        args.collection,
        max_shift_s=args.max_shift,
        anchor=args.anchor,
        manual=manual,
    )
    _emit(rec["result"], args.out)
    return 0


def cmd_mark(args) -> int:
    if args.shock is None and args.muzzle is None:
        raise ShotlocError("pass --shock and/or --muzzle times")
    if args.shock is not None and args.muzzle is not None and args.shock >= args.muzzle:
        raise ShotlocError(
            f"the shockwave must precede the muzzle blast "
            f"(got shock {args.shock} >= muzzle {args.muzzle})"
        )
    store = _store(args)
    doc = store.get_collection(args.collection)
    video = next((v for v in doc["videos"] if v["id"] == args.video), None)
    if video is None:
        raise ShotlocError(f"video {args.video!r} not in collection {args.collection}")
    # replace this event's marks, keep other events
    marks = [m for m in video["markings"] if m.get("event", 0) != args.event]
    if args.shock is not None:
        marks.append({"kind": "shock", "t": args.shock, "event": args.event})
    if args.muzzle is not None:
        marks.append({"kind": "muzzle", "t": args.muzzle, "event": args.event})
    updated = store.set_markings(args.collection, args.video, marks)
    out = next(v for v in updated["videos"] if v["id"] == args.video)
    _emit({"video": args.video, "markings": out["markings"]}, None)
    return 0


def cmd_estimate_m1(args) -> int:
    if args.t_diff is not None:
        inputs = Method1Inputs(
            tdiff=args.t_diff,
            vs_range=args.vs,
            vb_range=args.vb,
            alpha_deg_range=args.alpha,
            elevation_diff=args.elevation_diff,
            n_samples=args.samples,
        )
        est = estimate_method1(inputs, seed=args.seed)
        _emit(
            {
                "tdiff": args.t_diff,
                "slant": {
                    "min": round(est.slant_min, 6),
                    "max": round(est.slant_max, 6),
                    "mean": round(est.slant_mean, 6),
                },
                "dh": {
                    "min": round(est.dh_min, 6),
                    "max": round(est.dh_max, 6),
                    "mean": round(est.dh_mean, 6),
                },
                "n_feasible": est.n_feasible,
                "n_requested": est.n_requested,
                "seed": args.seed,
            },
            args.out,
        )
        return 0
    if not (args.collection and args.video):
        raise ShotlocError("pass --collection ID --video ID, or --t-diff SECONDS")
    rec = pipeline.estimate_m1(
        _store(args),
        args.collection,
        args.video,
        event=args.event,
        vs_range=args.vs,
        vb_range=args.vb,
        alpha_deg_range=args.alpha,
        elevation_diff=args.elevation_diff,
        n_samples=args.samples,
        seed=args.seed,
    )
    _emit(rec, args.out)
    return 0


def _band_json(band) -> dict:
    return {
        "separation": round(band.separation, 6),
        "delta_t": round(band.delta_t, 9),
        "two_a": {
            "lower": round(band.two_a_lower, 6),
            "center": round(band.two_a_center, 6),
            "upper": round(band.two_a_upper, 6),
        },
        "degenerate": band.degenerate,
        "infeasible_lines": list(band.infeasible_lines),
    }


def cmd_estimate_m2(args) -> int:
    if args.t_diff is not None:
        if args.cam_i is None or args.cam_j is None:
            raise ShotlocError("ad hoc mode wants --cam-i E,N and --cam-j E,N too")
        band = compute_band(
            0.0,
            args.t_diff,
            args.cam_i,
            args.cam_j,
            vs_range=args.vs,
            jitter_s=args.jitter,
            legacy_center=args.legacy_center,
        )
        _emit(_band_json(band), args.out)
        return 0
    if not (args.collection and args.video_i and args.video_j):
        raise ShotlocError(
            "pass --collection ID --video-i ID --video-j ID, "
            "or --t-diff SECONDS --cam-i E,N --cam-j E,N"
        )
    rec = pipeline.estimate_m2(
        _store(args),
        args.collection,
        args.video_i,
        args.video_j,
        event=args.event,
        vs_range=args.vs,
        jitter_s=args.jitter,
        legacy_center=args.legacy_center,
    )
    _emit(rec, args.out)
    return 0


def cmd_fuse(args) -> int:
    store = _store(args)
    rec = pipeline.fuse_collection(
        store,
        args.collection,
        m1_ids=args.m1 or None,
        m2_ids=args.m2 or None,
        cell_m=args.cell,
        margin=args.margin,
        mode=args.mode,
        frac=args.frac,
    )
    if args.grid_out:
        blob = store.get_artifact(args.collection, rec["result"]["heatmap_artifact"])
        Path(args.grid_out).write_bytes(blob)
    fc = pipeline.render_features(store, args.collection, [rec["id"]])
    _emit(fc, args.out)
    return 0


def cmd_geojson(args) -> int:
    fc = pipeline.render_features(_store(args), args.collection, args.estimate or None)
    _emit(fc, args.out)
    return 0


def cmd_simulate(args) -> int:
    store = _store(args)
    constraints = SceneConstraints(
        n_cameras=args.cameras,
        vs_range=args.vs_true,
        mach_range=args.mach,
        distance_range=args.distance,
        alpha_deg_range=args.alpha,
        inclination_deg_range=args.inclination,
        shooter_up_range=args.shooter_up,
        camera_up=args.camera_up,
    )
    scene, _ = generate_random_scene(args.seed, constraints)
    cid, truth = pipeline.simulate_scene(
        store,
        scene,
        name=args.name,
        frame_origin=args.frame_origin,
        seed=args.seed,
        noise_db=args.noise_db,
        ambient_db=args.ambient_db,
        fps=args.fps,
    )
    truth_path = Path(args.data_dir) / f"{cid}.truth.json"
    truth_path.write_text(json.dumps(truth, sort_keys=True, indent=2) + "\n")
    _emit(
        {
            "collection": cid,
            "truth_file": str(truth_path),
            "videos": sorted(truth["cameras"]),
            "shooter_enu": truth["shooter"]["enu"],
        },
        None,
    )
    return 0


def cmd_serve(args) -> int:
    token = args.token or os.environ.get("SHOTLOC_TOKEN")
    if not token:
        raise ShotlocError("pass --token or set SHOTLOC_TOKEN")
    from .service import serve

    serve(args.data_dir, token, host=args.host, port=args.port, workers=args.workers)
    return 0


# parser assembly


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="shotloc",
        description="Locate a shooter from unsynchronized gunshot recordings.",
    )
    p.add_argument(
        "--data-dir",
        default=os.environ.get("SHOTLOC_DATA", DEFAULT_DATA_DIR),
        help="store directory (default %(default)s, env SHOTLOC_DATA)",
    )
    p.add_argument("--json", action="store_true", help="machine-readable errors on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("ingest", cmd_ingest, "register a WAV recording into a collection")
    sp.add_argument("--collection", help="existing collection id")
    sp.add_argument("--create", metavar="NAME", help="create a new collection first")
    sp.add_argument("--frame-origin", type=_latlon, metavar="LAT,LON[,ELEV]",
                    help="local map origin for a new collection (degrees, meters)")
    sp.add_argument("--wav", required=True, help="path to a WAV file")
    sp.add_argument("--name", help="display name (default: file name)")
    sp.add_argument("--fps", type=float, default=30.0, help="video frame rate, frames/s")
    sp.add_argument("--position", type=_latlon, metavar="LAT,LON[,ELEV]",
                    help="camera position (degrees, meters elevation)")

    sp = add("spectrogram", cmd_spectrogram, "dump a spectrogram grid for marking")
    sp.add_argument("--wav", help="analyze a raw WAV file")
    sp.add_argument("--collection", help="or: collection id")
    sp.add_argument("--video", help="and video id")
    sp.add_argument("--window", type=int, default=1024, help="FFT window, samples")
    sp.add_argument("--hop", type=int, default=256, help="hop between frames, samples")
    sp.add_argument("--out", required=True, help="grid dump output file")

    sp = add("detect", cmd_detect, "list transient candidates for marking")
    sp.add_argument("--wav", help="analyze a raw WAV file")
    sp.add_argument("--collection", help="or: collection id")
    sp.add_argument("--video", help="and video id")
    sp.add_argument("--ratio-db", type=float, default=12.0,
                    help="short/long energy ratio threshold, dB")
    sp.add_argument("--min-sep-ms", type=float, default=50.0,
                    help="suppression window between candidates, ms")

    sp = add("sync", cmd_sync, "estimate pairwise offsets and fit the global timeline")
    sp.add_argument("--collection", required=True)
    sp.add_argument("--anchor", help="video id pinned to t=0")
    sp.add_argument("--max-shift", type=float, help="correlation search half-window, seconds")
    sp.add_argument("--manual", nargs=2, action="append", metavar=("I:FRAME", "J:FRAME"),
                    help="matched frame numbers in two videos; repeatable")
    sp.add_argument("--out", help="write timeline JSON here instead of stdout")

    sp = add("mark", cmd_mark, "set shock/muzzle times on a video")
    sp.add_argument("--collection", required=True)
    sp.add_argument("--video", required=True)
    sp.add_argument("--event", type=int, default=0, help="gunshot index")
    sp.add_argument("--shock", type=float, help="shockwave time, clip seconds")
    sp.add_argument("--muzzle", type=float, help="muzzle blast time, clip seconds")

    sp = add("estimate-m1", cmd_estimate_m1,
             "per-camera distance ring from the shock-to-muzzle gap")
    sp.add_argument("--collection")
    sp.add_argument("--video")
    sp.add_argument("--event", type=int, default=0, help="gunshot index")
    sp.add_argument("--t-diff", type=float,
                    help="ad hoc mode: shock-to-muzzle gap, seconds (skips the store)")
    sp.add_argument("--vs", type=_range, default=(331.3, 346.0),
                    help="speed of sound range MIN:MAX, m/s")
    sp.add_argument("--vb", type=_range, default=(400.0, 1000.0),
                    help="bullet speed range MIN:MAX, m/s")
    sp.add_argument("--alpha", type=_range, default=(0.0, 15.0),
                    help="trajectory-to-camera angle range MIN:MAX, degrees")
    sp.add_argument("--elevation-diff", type=float, default=0.0,
                    help="shooter height above cameras, meters")
    sp.add_argument("--samples", type=int, default=10000, help="Monte Carlo draws")
    sp.add_argument("--seed", type=int, default=0, help="random seed")
    sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = add("estimate-m2", cmd_estimate_m2,
             "hyperbola band from two cameras' muzzle arrival gap")
    sp.add_argument("--collection")
    sp.add_argument("--video-i")
    sp.add_argument("--video-j")
    sp.add_argument("--event", type=int, default=0, help="gunshot index")
    sp.add_argument("--t-diff", type=float,
                    help="ad hoc mode: arrival gap, seconds (camera i hears first)")
    sp.add_argument("--cam-i", type=_enu, metavar="E,N",
                    help="ad hoc camera i position, ENU meters")
    sp.add_argument("--cam-j", type=_enu, metavar="E,N",
                    help="ad hoc camera j position, ENU meters")
    sp.add_argument("--vs", type=_range, default=(331.3, 346.0),
                    help="speed of sound range MIN:MAX, m/s")
    sp.add_argument("--jitter", type=float, default=0.033,
                    help="sync uncertainty folded into the band, seconds")
    sp.add_argument("--legacy-center", action="store_true",
                    help="place the center line at vs_mean*max(t-jitter,0) instead of vs_mean*t")
    sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = add("fuse", cmd_fuse, "rasterize and fuse estimates into a heatmap")
    sp.add_argument("--collection", required=True)
    sp.add_argument("--m1", action="append", metavar="ESTIMATE_ID",
                    help="ring estimate to include; repeatable (default: latest each)")
    sp.add_argument("--m2", action="append", metavar="ESTIMATE_ID",
                    help="band estimate to include; repeatable (default: latest each)")
    sp.add_argument("--cell", type=float,
                    help="grid cell size, meters (default: 5, coarsened to fit the cell budget)")
    sp.add_argument("--margin", type=float,
                    help="grid margin around cameras, meters (default: ring reach)")
    sp.add_argument("--mode", choices=("product", "sum"), default="product")
    sp.add_argument("--frac", type=float, default=0.9,
                    help="argmax region threshold as a fraction of the peak")
    sp.add_argument("--out", help="write GeoJSON here instead of stdout")
    sp.add_argument("--grid-out", help="also copy the heatmap grid dump to this file")

    sp = add("geojson", cmd_geojson, "render stored estimates as GeoJSON")
    sp.add_argument("--collection", required=True)
    sp.add_argument("--estimate", action="append", metavar="ESTIMATE_ID",
                    help="specific estimate ids; repeatable (default: latest of each kind)")
    sp.add_argument("--out", help="write GeoJSON here instead of stdout")

    sp = add("simulate", cmd_simulate, "plant a random scene and synthesize its recordings")
    sp.add_argument("--seed", type=int, required=True, help="random seed")
    sp.add_argument("--cameras", type=int, default=3, help="number of recordings")
    sp.add_argument("--name", default="synthetic scene", help="collection name")
    sp.add_argument("--frame-origin", type=_latlon, metavar="LAT,LON[,ELEV]",
                    help="map origin (default: a desert test range)")
    sp.add_argument("--distance", type=_range, default=(50.0, 2000.0),
                    help="camera-to-shooter distance range MIN:MAX, meters")
    sp.add_argument("--mach", type=_range, default=(1.2, 3.0),
                    help="bullet mach number range MIN:MAX")
    sp.add_argument("--alpha", type=_range, default=(0.0, 15.0),
                    help="trajectory-to-camera angle range MIN:MAX, degrees")
    sp.add_argument("--inclination", type=_range, default=(-10.0, 10.0),
                    help="trajectory inclination range MIN:MAX, degrees")
    sp.add_argument("--vs-true", type=_range, default=(331.3, 346.0),
                    help="true speed of sound range MIN:MAX, m/s")
    sp.add_argument("--shooter-up", type=_range, default=(1.5, 2.0),
                    help="shooter height range MIN:MAX, meters")
    sp.add_argument("--camera-up", type=float,
                    help="fix all cameras at this height, meters")
    sp.add_argument("--noise-db", type=float, default=-40.0,
                    help="per-camera noise floor, dBFS")
    sp.add_argument("--ambient-db", type=float, default=-30.0,
                    help="shared ambient bed level, dBFS")
    sp.add_argument("--fps", type=float, default=30.0, help="nominal frame rate")

    sp = add("serve", cmd_serve, "start the HTTP service")
    sp.add_argument("--token", help="bearer token (or env SHOTLOC_TOKEN)")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8646)
    sp.add_argument("--workers", type=int, default=2, help="job worker threads")

    return p


def _report_error(exc: Exception, as_json: bool) -> None:
    if as_json:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}, sort_keys=True)
            + "\n"
        )
    else:
        sys.stderr.write(f"shotloc: {exc}\n")


def main(argv=None) -> int:
    parser = build_parser()
    as_json = "--json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ShotlocError as exc:
        _report_error(exc, as_json)
        return exc.exit_code
    except OSError as exc:
        _report_error(exc, as_json)
        return 3


if __name__ == "__main__":
    sys.exit(main())
