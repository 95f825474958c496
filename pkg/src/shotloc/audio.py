"""Audio ingestion and marking aids.

Loads WAV audio, renders the spectrogram and short-time power envelope a
human uses to mark gunshot components, and proposes transient-onset
candidates from a short/long energy ratio. Candidates are suggestions
only; confirmed markings always come from a person.

Fixed analysis constants (so spectrogram tests are reproducible): Hann
window, dB floor at -100 dB. Audio extraction from video containers is
out of scope; feed WAV produced by any external demuxer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.io import wavfile
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks, get_window

from .errors import ClipTooShort, CorruptFile, UnsupportedFormat

DB_FLOOR = -100.0
MIN_RATE = 8000
MAX_RATE = 192000


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray  # mono float in [-1, 1]
    rate: int
    source_video: str = ""

    def __post_init__(self):
        if not MIN_RATE <= self.rate <= MAX_RATE:
            raise UnsupportedFormat(f"sample rate {self.rate} outside [{MIN_RATE}, {MAX_RATE}]")
        if len(self.samples) < 1:
            raise UnsupportedFormat("empty clip")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.rate


@dataclass(frozen=True)
class Spectrogram:
    magnitudes_db: np.ndarray  # (frames, freq bins)
    hop: int
    window: int
    rate: int

    @property
    def frame_times(self) -> np.ndarray:
        # center of each analysis window
        return (np.arange(self.magnitudes_db.shape[0]) * self.hop + self.window / 2) / self.rate

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.rfftfreq(self.window, d=1.0 / self.rate)


@dataclass(frozen=True)
class TransientCandidate:
    time: float  # seconds from clip start
    score_db: float


def load_wav(path, source_video: str = "") -> AudioClip:
    """Read a PCM16 or float32 WAV, 1-2 channels, downmixing to mono."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise CorruptFile(f"cannot parse {path}: {exc}") from exc

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormat(f"{path}: dtype {data.dtype} (want PCM16 or float32)")

    if samples.ndim == 2:
        if samples.shape[1] > 2:
            raise UnsupportedFormat(f"{path}: {samples.shape[1]} channels (want 1 or 2)")
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise CorruptFile(f"{path}: unexpected array shape {samples.shape}")

    samples = np.clip(samples, -1.0, 1.0)
    return AudioClip(samples=samples, rate=int(rate), source_video=source_video)


def write_wav(clip: AudioClip, path) -> None:
    wavfile.write(path, clip.rate, clip.samples.astype(np.float32))


def spectrogram(clip: AudioClip, window: int = 1024, hop: int = 256) -> Spectrogram:
    """Hann-windowed short-time Fourier magnitudes in dB, floored at -100."""
    if window < 2 or window & (window - 1):
        raise ValueError("window must be a power of two")
    if not 1 <= hop <= window:
        raise ValueError("hop must be in [1, window]")
    x = clip.samples
    if len(x) < window:
        raise ClipTooShort(f"clip of {len(x)} samples shorter than window {window}")

    frames = np.lib.stride_tricks.sliding_window_view(x, window)[::hop]
    w = get_window("hann", window, fftbins=True)
    mags = np.abs(np.fft.rfft(frames * w, axis=1))
    floor_amp = 10.0 ** (DB_FLOOR / 20.0)
    db = 20.0 * np.log10(np.maximum(mags, floor_amp))
    return Spectrogram(magnitudes_db=db, hop=hop, window=window, rate=clip.rate)


def power_envelope(clip: AudioClip, win_ms: float = 5.0) -> np.ndarray:
    """Short-time RMS on the clip's own time base (one value per sample)."""
    if win_ms < 1.0:
        raise ValueError("win_ms must be >= 1")
    n = max(1, int(round(win_ms * clip.rate / 1000.0)))
    if len(clip.samples) < n:
        raise ClipTooShort(f"clip shorter than {win_ms} ms window")
    mean_sq = uniform_filter1d(clip.samples**2, size=n, mode="nearest")
    return np.sqrt(np.maximum(mean_sq, 0.0))


def detect_transients(
    clip: AudioClip,
    ratio_db: float = 12.0,
    min_sep_ms: float = 50.0,
    short_ms: float = 5.0,
    long_ms: float = 500.0,
) -> list[TransientCandidate]:
    """Candidate onset times where short-window energy jumps over the
    long-window background by more than ratio_db.

    Local maxima of the energy ratio are non-max suppressed within
    min_sep_ms and returned in descending score order. Empty list when
    nothing stands out (steady tones, silence).
    """
    if clip.duration < 0.2:
        raise ClipTooShort("need at least 200 ms of audio")
    x = clip.samples.astype(np.float64)
    energy = x * x
    n_short = max(1, int(round(short_ms * clip.rate / 1000.0)))
    n_long = min(len(x), max(n_short + 1, int(round(long_ms * clip.rate / 1000.0))))
    short_e = uniform_filter1d(energy, size=n_short, mode="nearest")
    long_e = uniform_filter1d(energy, size=n_long, mode="nearest")
    eps = 1e-12
    ratio = 10.0 * np.log10((short_e + eps) / (long_e + eps))

    peaks, props = find_peaks(ratio, height=ratio_db)
    if len(peaks) == 0:
        return []
    order = np.argsort(props["peak_heights"])[::-1]
    min_sep = int(round(min_sep_ms * clip.rate / 1000.0))
    kept: list[int] = []
    for idx in peaks[order]:
        if all(abs(idx - k) >= min_sep for k in kept):
            kept.append(int(idx))
    return [TransientCandidate(time=i / clip.rate, score_db=float(ratio[i])) for i in kept]


def spectrogram_energy_db(spec: Spectrogram) -> np.ndarray:
    """Per-frame energy from spectral magnitudes, in dB, normalized so a
    stationary signal matches 20*log10(power_envelope) at frame centers
    (Parseval, Hann window power factored out)."""
    mags = 10.0 ** (spec.magnitudes_db / 20.0)
    sq = mags**2
    # undo rfft one-sidedness: double every bin except DC (and Nyquist for even windows)
    weights = np.full(sq.shape[1], 2.0)
    weights[0] = 1.0
    if spec.window % 2 == 0:
        weights[-1] = 1.0
    frame_energy = (sq * weights).sum(axis=1) / spec.window
    w = get_window("hann", spec.window, fftbins=True)
    mean_sq = frame_energy / (w**2).sum()
    return 10.0 * np.log10(np.maximum(mean_sq, 10.0 ** (DB_FLOOR / 10.0)))
