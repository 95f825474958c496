"""Durable state for incidents: one JSON document per collection.

A collection bundles everything about one incident: the map frame
origin, the ingested recordings with their markings and timeline
starts, and every estimate produced from them. The whole collection
lives in data_dir/{cid}.json, written atomically (temp file in the same
directory, then os.replace) so a crash mid-write can never leave a
half document behind. Binary sidecars (extracted audio, grid dumps)
live next to it under data_dir/{cid}.artifacts/.

Ids are deterministic and dense (c0001, c0001-v01, e0001) so that runs
with fixed seeds produce byte-identical documents. Every mutation bumps
the document version; writers pass the version they read and collide
with a Conflict instead of silently clobbering each other.
"""

from __future__ import annotations

import copy
import json
import os
import re
import threading
import zipfile
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    Conflict,
    CorruptFile,
    FrameOutOfRange,
    IntegrityViolation,
    NotFound,
)

MARK_KINDS = ("shock", "muzzle")
ESTIMATE_KINDS = ("sync", "m1", "m2", "fuse")
_ID_RE = re.compile(r"^c(\d{4,})$")
_ARTIFACT_RE = re.compile(r"^[A-Za-z0-9._-]+$")


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _check_position(pos: dict | None) -> dict | None:
    if pos is None:
        return None
    try:
        lat, lon = float(pos["lat"]), float(pos["lon"])
        elev = float(pos.get("elev", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityViolation(f"position needs numeric lat/lon: {pos!r}") from exc
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise IntegrityViolation(f"position out of range: {pos!r}")
    return {"lat": lat, "lon": lon, "elev": elev}


class Store:
    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        # serializes read-modify-write cycles between worker threads;
        # cross-process writers still rely on the version check
        self._lock = threading.RLock()

    # paths

    def _doc_path(self, cid: str) -> Path:
        return self.data_dir / f"{cid}.json"

    def _artifacts_dir(self, cid: str) -> Path:
        return self.data_dir / f"{cid}.artifacts"

    # document io

    def _read(self, cid: str) -> dict:
        path = self._doc_path(cid)
        if not path.exists():
            raise NotFound(f"collection {cid!r} does not exist")
        try:
            with open(path) as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"{path}: {exc}") from exc

    def _write(self, doc: dict) -> None:
        path = self._doc_path(doc["id"])
        tmp = path.with_suffix(".json.tmp")
        with open(tmp, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def _mutate(self, cid: str, expected_version: int | None, fn) -> dict:
        """Read-modify-write with optimistic version check. fn edits the
        doc in place; the version bump happens here."""
        with self._lock:
            doc = self._read(cid)
            if expected_version is not None and doc["version"] != expected_version:
                raise Conflict(
                    f"collection {cid} is at version {doc['version']}, "
                    f"caller expected {expected_version}"
                )
            fn(doc)
            doc["version"] += 1
            self._write(doc)
            return copy.deepcopy(doc)

    # collections

    def create_collection(
        self, name: str, frame_origin: dict | None = None, created_at: str | None = None
    ) -> dict:
        with self._lock:
            return self._create_locked(name, frame_origin, created_at)

    def _create_locked(self, name, frame_origin, created_at) -> dict:
        taken = [
            int(m.group(1))
            for p in self.data_dir.glob("c*.json")
            if (m := _ID_RE.match(p.stem))
        ]
        cid = f"c{(max(taken) + 1 if taken else 1):04d}"
        doc = {
            "id": cid,
            "name": str(name),
            "created_at": created_at or _now_iso(),
            "version": 0,
            "frame_origin": _check_position(frame_origin),
            "videos": [],
            "estimates": [],
        }
        self._write(doc)
        return copy.deepcopy(doc)

    def get_collection(self, cid: str) -> dict:
        return self._read(cid)

    def list_collections(self) -> list[dict]:
        out = []
        for path in sorted(self.data_dir.glob("c*.json")):
            if not _ID_RE.match(path.stem):
                continue
            doc = self._read(path.stem)
            out.append(
                {
                    "id": doc["id"],
                    "name": doc["name"],
                    "created_at": doc["created_at"],
                    "version": doc["version"],
                    "n_videos": len(doc["videos"]),
                    "n_estimates": len(doc["estimates"]),
                }
            )
        return out

    def update_collection(
        self,
        cid: str,
        expected_version: int | None = None,
        name: str | None = None,
        frame_origin: dict | None = None,
    ) -> dict:
        def fn(doc):
            if name is not None:
                doc["name"] = str(name)
            if frame_origin is not None:
                doc["frame_origin"] = _check_position(frame_origin)

        return self._mutate(cid, expected_version, fn)

    def delete_collection(self, cid: str) -> None:
        path = self._doc_path(cid)
        if not path.exists():
            raise NotFound(f"collection {cid!r} does not exist")
        path.unlink()
        art = self._artifacts_dir(cid)
        if art.exists():
            for f in art.iterdir():
                f.unlink()
            art.rmdir()

    # videos

    def _video(self, doc: dict, vid: str) -> dict:
        for v in doc["videos"]:
            if v["id"] == vid:
                return v
        raise NotFound(f"video {vid!r} not in collection {doc['id']}")

    def add_video(
        self,
        cid: str,
        name: str,
        fps: float,
        expected_version: int | None = None,
        duration: float | None = None,
        position: dict | None = None,
        audio: str | None = None,
        created_at: str | None = None,
    ) -> tuple[dict, dict]:
        if not fps > 0:
            raise IntegrityViolation(f"fps must be positive, got {fps}")
        if duration is not None and duration <= 0:
            raise IntegrityViolation(f"duration must be positive, got {duration}")
        video = {
            "name": str(name),
            "fps": float(fps),
            "duration": None if duration is None else float(duration),
            "position": _check_position(position),
            "audio": audio,
            "start": None,
            "markings": [],
            "created_at": created_at or _now_iso(),
        }

        def fn(doc):
            video["id"] = f"{cid}-v{len(doc['videos']) + 1:02d}"
            doc["videos"].append(video)

        doc = self._mutate(cid, expected_version, fn)
        return doc, copy.deepcopy(video)

    def update_video(
        self,
        cid: str,
        vid: str,
        expected_version: int | None = None,
        position: dict | None = None,
        start: float | None = None,
        audio: str | None = None,
    ) -> dict:
        def fn(doc):
            v = self._video(doc, vid)
            if position is not None:
                v["position"] = _check_position(position)
            if start is not None:
                v["start"] = float(start)
            if audio is not None:
                v["audio"] = audio

        return self._mutate(cid, expected_version, fn)

    def set_markings(
        self, cid: str, vid: str, markings: list[dict], expected_version: int | None = None
    ) -> dict:
        cleaned = []
        for m in markings:
            kind = m.get("kind")
            if kind not in MARK_KINDS:
                raise IntegrityViolation(f"marking kind must be one of {MARK_KINDS}: {m!r}")
            try:
                t = float(m["t"])
            except (KeyError, TypeError, ValueError) as exc:
                raise IntegrityViolation(f"marking needs a numeric clip time: {m!r}") from exc
            if not t >= 0.0:
                raise IntegrityViolation(f"marking time must be >= 0: {m!r}")
            cleaned.append({"kind": kind, "t": t, "event": int(m.get("event", 0))})

        def fn(doc):
            v = self._video(doc, vid)
            if v["duration"] is not None:
                for m in cleaned:
                    if m["t"] > v["duration"]:
                        raise FrameOutOfRange(
                            f"mark at {m['t']} s beyond the {v['duration']} s clip"
                        )
            v["markings"] = cleaned

        return self._mutate(cid, expected_version, fn)

    def remove_video(self, cid: str, vid: str, expected_version: int | None = None) -> dict:
        removed_audio: list[str] = []

        def fn(doc):
            v = self._video(doc, vid)
            doc["videos"].remove(v)
            if v.get("audio"):
                removed_audio.append(v["audio"])
            doc["estimates"] = [e for e in doc["estimates"] if vid not in e["inputs"]]

        doc = self._mutate(cid, expected_version, fn)
        for name in removed_audio:
            path = self._artifacts_dir(cid) / name
            if path.exists():
                path.unlink()
        return doc

    # estimates

    def add_estimate(
        self,
        cid: str,
        kind: str,
        params: dict,
        inputs: list[str],
        result: dict,
        expected_version: int | None = None,
        created_at: str | None = None,
    ) -> tuple[dict, dict]:
        if kind not in ESTIMATE_KINDS:
            raise IntegrityViolation(f"estimate kind must be one of {ESTIMATE_KINDS}")
        record = {
            "kind": kind,
            "params": params,
            "inputs": list(inputs),
            "result": result,
            "created_at": created_at or _now_iso(),
        }

        def fn(doc):
            known = {v["id"] for v in doc["videos"]}
            missing = [v for v in record["inputs"] if v not in known]
            if missing:
                raise IntegrityViolation(f"estimate references unknown videos {missing}")
            record["id"] = f"e{len(doc['estimates']) + 1:04d}"
            doc["estimates"].append(record)

        doc = self._mutate(cid, expected_version, fn)
        return doc, copy.deepcopy(record)

    # artifacts

    def _artifact_path(self, cid: str, name: str) -> Path:
        if not _ARTIFACT_RE.match(name):
            raise ValueError(f"artifact name {name!r} must be a plain filename")
        return self._artifacts_dir(cid) / name

    def put_artifact(self, cid: str, name: str, data: bytes) -> Path:
        self._read(cid)  # collection must exist
        path = self._artifact_path(cid, name)
        path.parent.mkdir(exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)
        return path

    def get_artifact(self, cid: str, name: str) -> bytes:
        path = self._artifact_path(cid, name)
        if not path.exists():
            raise NotFound(f"artifact {name!r} not in collection {cid}")
        return path.read_bytes()

    def artifact_path(self, cid: str, name: str) -> Path:
        path = self._artifact_path(cid, name)
        if not path.exists():
            raise NotFound(f"artifact {name!r} not in collection {cid}")
        return path

    def list_artifacts(self, cid: str) -> list[str]:
        art = self._artifacts_dir(cid)
        if not art.exists():
            return []
        return sorted(p.name for p in art.iterdir())

    # export / import

    def export_zip(self, cid: str, path) -> None:
        """Zip the document and artifacts with fixed timestamps so the
        same collection always exports byte-identically."""
        doc = self._read(cid)
        stamp = (1980, 1, 1, 0, 0, 0)
        with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
            info = zipfile.ZipInfo(f"{cid}.json", date_time=stamp)
            zf.writestr(info, json.dumps(doc, indent=2, sort_keys=True) + "\n")
            for name in self.list_artifacts(cid):
                info = zipfile.ZipInfo(f"artifacts/{name}", date_time=stamp)
                zf.writestr(info, self.get_artifact(cid, name))

    def import_zip(self, path) -> dict:
        """Restore an exported collection, id and timestamps included.
        Refuses to overwrite an existing collection with the same id."""
        with zipfile.ZipFile(path) as zf:
            names = zf.namelist()
            docs = [n for n in names if n.endswith(".json") and "/" not in n]
            if len(docs) != 1:
                raise CorruptFile(f"{path}: expected one collection document, found {docs}")
            doc = json.loads(zf.read(docs[0]))
            cid = doc.get("id")
            if not isinstance(cid, str) or not _ID_RE.match(cid):
                raise CorruptFile(f"{path}: bad collection id {cid!r}")
            if self._doc_path(cid).exists():
                raise Conflict(f"collection {cid} already exists")
            self._write(doc)
            for n in names:
                if n.startswith("artifacts/") and not n.endswith("/"):
                    self.put_artifact(cid, n.split("/", 1)[1], zf.read(n))
        return copy.deepcopy(doc)
