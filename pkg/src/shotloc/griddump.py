"""Plain-text dump of a 2D float grid with a small metadata header.

One format serves both map heatmaps and spectrogram exports, so any
grid the tool emits can be diffed, gnuplotted, or reloaded without
caring which stage produced it.

Layout:

    #griddump v1
    <key> <value>        (zero or more metadata lines, sorted by key)
    rows <R>
    cols <C>
    <C floats>           (R data lines, row-major, %.9g)

The keys "rows" and "cols" are reserved and always close the header.
Values are stored as strings; numeric callers parse what they wrote.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptFile

MAGIC = "#griddump v1"
RESERVED = ("rows", "cols")


def dump_text(values: np.ndarray, meta: dict | None = None) -> str:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"grid must be 2D, got shape {arr.shape}")
    meta = dict(meta or {})
    for key in meta:
        if key in RESERVED:
            raise ValueError(f"metadata key {key!r} is reserved")
        if any(ch.isspace() for ch in key):
            raise ValueError(f"metadata key {key!r} contains whitespace")
    lines = [MAGIC]
    for key in sorted(meta):
        lines.append(f"{key} {meta[key]}")
    lines.append(f"rows {arr.shape[0]}")
    lines.append(f"cols {arr.shape[1]}")
    for row in arr:
        lines.append(" ".join("%.9g" % v for v in row))
    return "\n".join(lines) + "\n"


def write_griddump(path, values: np.ndarray, meta: dict | None = None) -> None:
    text = dump_text(values, meta)
    with open(path, "w") as fh:
        fh.write(text)


def read_griddump(path) -> tuple[np.ndarray, dict[str, str]]:
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != MAGIC:
            raise CorruptFile(f"{path}: not a griddump (header {first!r})")
        meta: dict[str, str] = {}
        rows = cols = None
        for raw in fh:
            line = raw.rstrip("\n")
            key, _, value = line.partition(" ")
            if key == "rows":
                rows = int(value)
            elif key == "cols":
                cols = int(value)
                break
            else:
                meta[key] = value
        if rows is None or cols is None:
            raise CorruptFile(f"{path}: header ended without rows/cols")
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    if data.shape != (rows, cols):
        raise CorruptFile(f"{path}: expected {rows}x{cols} values, got {data.shape}")
    return data, meta
