"""Clock alignment across independently started recordings.

Phones and cameras at the same event share no timecode, so every
per-clip timestamp is meaningless until the clips are placed on one
timeline. Pairwise offsets come from whitened cross-correlation of the
soundtracks (the shared ambient bed dominates; the correlation is
normalized per frequency bin so loud narrowband content cannot): the
offset of pair (i, j) is defined as start_j - start_i, the amount by
which recording j started later.

Pairs alone overdetermine and possibly contradict each other, so a
weighted least squares over the offset graph assigns each recording a
start time. Confident audio pairs pull harder; human frame matches
override audio entirely. Recordings with no path to the anchor cannot
be placed on its timeline and each such group gets its own zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import resample_poly

from .audio import AudioClip
from .errors import ClipTooShort

ANALYSIS_RATE = 8000
LOW_CONFIDENCE = 0.1
PEAK_EXCLUDE_S = 0.001  # closer rival peaks count as the same peak
MANUAL_WEIGHT_FACTOR = 10.0
MIN_AUDIO_WEIGHT = 1e-3


@dataclass(frozen=True)
class PairwiseOffset:
    i: str
    j: str
    offset: float  # start_j - start_i, seconds
    confidence: float  # 1 - (runner-up peak / main peak), in [0, 1]
    method: str = "audio"  # "audio" or "manual"
    uncertainty_s: float | None = None  # half-window of a manual match

    def reversed(self) -> "PairwiseOffset":
        return replace(self, i=self.j, j=self.i, offset=-self.offset)

    @property
    def low_confidence(self) -> bool:
        return self.method == "audio" and self.confidence < LOW_CONFIDENCE


def _to_analysis_rate(clip: AudioClip) -> np.ndarray:
    if clip.rate == ANALYSIS_RATE:
        return clip.samples
    g = math.gcd(clip.rate, ANALYSIS_RATE)
    return resample_poly(clip.samples, ANALYSIS_RATE // g, clip.rate // g)


def estimate_offset(
    clip_i: AudioClip, clip_j: AudioClip, max_shift_s: float | None = None
) -> PairwiseOffset:
    """Whitened cross-correlation at a fixed 8 kHz analysis rate.

    The peak lag k satisfies clip_j[n] ~ clip_i[n + k], i.e. recording j
    started k/rate seconds after recording i. A parabola through the
    peak and its neighbors refines the lag below one sample. Confidence
    compares the peak against the best rival more than 1 ms away."""
    a = _to_analysis_rate(clip_i)
    b = _to_analysis_rate(clip_j)
    if min(len(a), len(b)) < ANALYSIS_RATE // 20:
        raise ClipTooShort("need at least 50 ms of audio to correlate")

    max_shift = min(len(a), len(b)) - 1
    if max_shift_s is not None:
        max_shift = min(max_shift, int(round(max_shift_s * ANALYSIS_RATE)))
    if max_shift < 1:
        raise ClipTooShort("clips too short for any shift")

    nfft = 1 << (len(a) + len(b) - 1).bit_length()
    spec = np.fft.rfft(a, nfft) * np.conj(np.fft.rfft(b, nfft))
    mag = np.abs(spec)
    spec = np.where(mag > 1e-12, spec / np.maximum(mag, 1e-12), 0.0)
    cc = np.fft.irfft(spec, nfft)
    # cc[k] = sum_n a[n+k] b[n], negative lags wrapped to the tail
    window = np.concatenate([cc[-max_shift:], cc[: max_shift + 1]])
    lags = np.arange(-max_shift, max_shift + 1)

    score = np.abs(window)
    peak = int(np.argmax(score))
    lag = float(lags[peak])
    if 0 < peak < len(score) - 1:
        ym, y0, yp = score[peak - 1], score[peak], score[peak + 1]
        denom = ym - 2.0 * y0 + yp
        if denom < 0:
            lag += 0.5 * (ym - yp) / denom

    exclude = int(round(PEAK_EXCLUDE_S * ANALYSIS_RATE))
    rival_mask = np.abs(lags - lags[peak]) > exclude
    p1 = score[peak]
    p2 = float(score[rival_mask].max()) if rival_mask.any() else 0.0
    confidence = max(0.0, 1.0 - p2 / p1) if p1 > 0 else 0.0

    return PairwiseOffset(
        i=clip_i.source_video,
        j=clip_j.source_video,
        offset=lag / ANALYSIS_RATE,
        confidence=float(confidence),
    )


def refine_manual(
    i: str, j: str, frame_i: int, frame_j: int, fps_i: float, fps_j: float
) -> PairwiseOffset:
    """Offset from a human matching the same visual instant in two
    videos: the event sits frame_i/fps_i into recording i and
    frame_j/fps_j into recording j, so j started the difference later.
    Resolution is half a frame on each side."""
    if fps_i <= 0 or fps_j <= 0:
        raise ValueError("frame rates must be positive")
    if frame_i < 0 or frame_j < 0:
        raise ValueError("frame indices must be nonnegative")
    return PairwiseOffset(
        i=i,
        j=j,
        offset=frame_i / fps_i - frame_j / fps_j,
        confidence=1.0,
        method="manual",
        uncertainty_s=0.5 * (1.0 / fps_i + 1.0 / fps_j),
    )


@dataclass(frozen=True)
class GlobalTimeline:
    starts: dict[str, float]
    anchor: str
    components: tuple[frozenset, ...]  # anchor's component first
    residuals: tuple[float, ...]  # per input pair: fitted minus measured
    low_confidence_pairs: tuple[tuple[str, str], ...]

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    @property
    def disconnected(self) -> tuple[str, ...]:
        out = []
        for comp in self.components[1:]:
            out.extend(sorted(comp))
        return tuple(out)


def _components(ids: list[str], offsets: list[PairwiseOffset]) -> list[set[str]]:
    parent = {v: v for v in ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for o in offsets:
        ri, rj = find(o.i), find(o.j)
        if ri != rj:
            parent[ri] = rj
    groups: dict[str, set[str]] = {}
    for v in ids:
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def _pair_weights(offsets: list[PairwiseOffset]) -> list[float]:
    audio_w = [max(o.confidence, MIN_AUDIO_WEIGHT) for o in offsets if o.method == "audio"]
    manual_w = MANUAL_WEIGHT_FACTOR * (max(audio_w) if audio_w else MIN_AUDIO_WEIGHT * 100)
    return [
        max(o.confidence, MIN_AUDIO_WEIGHT) if o.method == "audio" else manual_w
        for o in offsets
    ]


def aggregate_timeline(
    video_ids: list[str], offsets: list[PairwiseOffset], anchor: str | None = None
) -> GlobalTimeline:
    """Per-recording start times from pairwise offsets.

    The anchor (default: lexicographically first id) is pinned to zero;
    every other recording in its connected component gets the weighted
    least squares fit of all offset equations start_j - start_i =
    offset. Components with no measurement linking them to the anchor
    are fitted internally the same way, pinned at their own first id,
    and reported via `disconnected`."""
    if not video_ids:
        raise ValueError("no recordings to place on a timeline")
    ids = sorted(set(video_ids))
    for o in offsets:
        if o.i not in ids or o.j not in ids:
            raise ValueError(f"offset references unknown recording {o.i!r}/{o.j!r}")
        if o.i == o.j:
            raise ValueError(f"self-offset on {o.i!r}")
    anchor = anchor if anchor is not None else ids[0]
    if anchor not in ids:
        raise ValueError(f"anchor {anchor!r} not among recordings")

    comps = _components(ids, offsets)
    comps.sort(key=lambda c: (anchor not in c, min(c)))
    weights = _pair_weights(offsets)

    starts: dict[str, float] = {}
    for comp in comps:
        pin = anchor if anchor in comp else min(comp)
        free = sorted(comp - {pin})
        col = {v: k for k, v in enumerate(free)}
        rows = [(k, o) for k, o in enumerate(offsets) if o.i in comp]
        starts[pin] = 0.0
        if not free:
            continue
        a_mat = np.zeros((len(rows), len(free)))
        b_vec = np.zeros(len(rows))
        for r, (k, o) in enumerate(rows):
            w = weights[k]
            if o.j in col:
                a_mat[r, col[o.j]] += w
            if o.i in col:
                a_mat[r, col[o.i]] -= w
            b_vec[r] = w * o.offset
        sol, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
        for v, x in zip(free, sol):
            starts[v] = float(x)

    residuals = tuple(starts[o.j] - starts[o.i] - o.offset for o in offsets)
    low = tuple((o.i, o.j) for o in offsets if o.low_confidence)
    return GlobalTimeline(
        starts={v: starts[v] for v in ids},
        anchor=anchor,
        components=tuple(frozenset(c) for c in comps),
        residuals=residuals,
        low_confidence_pairs=low,
    )
