"""MFCC features for stereo clips.

Each channel is pre-emphasized, cut into Hamming-windowed frames, reduced to
mel filterbank energies, and turned into cepstral coefficients with
``C(l) = sum_b log10(1 + E(b)) cos(l*pi/B*(b + 0.5))``. Coefficients are
averaged over frames and the right channel's vector is appended to the left
channel's.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audio_io import StereoClip

PREEMPH_COEFF = 0.95


@dataclass(frozen=True)
class FrameConfig:
    frame_len: int
    hop_len: int
    preemph_coeff: float = PREEMPH_COEFF

    def __post_init__(self):
        if self.frame_len < 2:
            raise ValueError(f"frame_len must be at least 2, got {self.frame_len}")
        if not 0 < self.hop_len <= self.frame_len:
            raise ValueError(f"hop_len must lie in (0, frame_len], got {self.hop_len}")

    @classmethod
    def for_rate(cls, sample_rate_hz: int, frame_ms: float = 25.0, hop_ms: float = 10.0):
        """25 ms frames with a 10 ms hop, rounded half-up to whole samples."""
        frame = int(math.floor(sample_rate_hz * frame_ms / 1000.0 + 0.5))
        hop = int(math.floor(sample_rate_hz * hop_ms / 1000.0 + 0.5))
        return cls(frame, hop)

    @property
    def fft_len(self) -> int:
        # frames are zero-padded up to the next power of two
        return 1 << (self.frame_len - 1).bit_length()


@dataclass(frozen=True)
class MelConfig:
    num_filters: int = 40
    min_hz: float = 0.0
    max_hz: Optional[float] = None  # None means the Nyquist frequency
    num_coeffs: int = 40

    def __post_init__(self):
        if self.num_filters < 1 or self.num_coeffs < 1:
            raise ValueError("num_filters and num_coeffs must be positive")
        if self.num_coeffs > self.num_filters:
            raise ValueError(
                f"num_coeffs ({self.num_coeffs}) cannot exceed num_filters ({self.num_filters})"
            )
        if self.min_hz < 0:
            raise ValueError("min_hz must be non-negative")
        if self.max_hz is not None and self.max_hz <= self.min_hz:
            raise ValueError("max_hz must exceed min_hz")

    def resolved(self, sample_rate_hz: int) -> "MelConfig":
        nyquist = sample_rate_hz / 2.0
        top = nyquist if self.max_hz is None else self.max_hz
        if top > nyquist:
            raise ValueError(f"max_hz {top} exceeds Nyquist {nyquist}")
        return MelConfig(self.num_filters, self.min_hz, float(top), self.num_coeffs)


@dataclass(frozen=True, eq=False)
class ClipFeature:
    values: np.ndarray
    label: Optional[str] = None
    provenance: str = ""

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0 or arr.size % 2:
            raise ValueError(f"feature must be a non-empty even-length vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_coeffs(self) -> int:
        return self.values.size // 2

    @property
    def left(self) -> np.ndarray:
        return self.values[: self.num_coeffs]

    @property
    def right(self) -> np.ndarray:
        return self.values[self.num_coeffs :]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def pre_emphasize(x, coeff: float = PREEMPH_COEFF) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot pre-emphasize an empty signal")
    out = x.copy()
    out[1:] -= coeff * x[:-1]
    return out


def hamming_window(n: int, N: int) -> float:
    if N < 2:
        raise ValueError("window length must be at least 2")
    if not 0 <= n <= N - 1:
        raise ValueError(f"index {n} outside [0, {N - 1}]")
    return 0.54 - 0.46 * math.cos(2.0 * math.pi * n / (N - 1))


@functools.lru_cache(maxsize=16)
def hamming(N: int) -> np.ndarray:
    n = np.arange(N)
    w = 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (N - 1))
    w.setflags(write=False)
    return w


def frame_signal(x, cfg: FrameConfig) -> np.ndarray:
    """Windowed frames as rows of a (n_frames, frame_len) array."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < cfg.frame_len:
        raise ValueError(f"signal of {x.size} samples is shorter than one frame ({cfg.frame_len})")
    n_frames = (x.size - cfg.frame_len) // cfg.hop_len + 1
    idx = np.arange(cfg.frame_len)[None, :] + cfg.hop_len * np.arange(n_frames)[:, None]
    return x[idx] * hamming(cfg.frame_len)


@functools.lru_cache(maxsize=16)
def mel_filterbank(mel: MelConfig, sample_rate_hz: int, fft_len: int) -> np.ndarray:
    """Triangular unit-peak filters sampled at the rfft bin frequencies.

    Returns a (num_filters, fft_len // 2 + 1) weight matrix.
    """
    mel = mel.resolved(sample_rate_hz)
    edges = mel_to_hz(
        np.linspace(hz_to_mel(mel.min_hz), hz_to_mel(mel.max_hz), mel.num_filters + 2)
    )
    freqs = np.arange(fft_len // 2 + 1) * (sample_rate_hz / fft_len)
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb.setflags(write=False)
    return fb


def filter_centers(mel: MelConfig, sample_rate_hz: int) -> np.ndarray:
    mel = mel.resolved(sample_rate_hz)
    edges = mel_to_hz(
        np.linspace(hz_to_mel(mel.min_hz), hz_to_mel(mel.max_hz), mel.num_filters + 2)
    )
    return edges[1:-1]


def power_spectrum(frames: np.ndarray, fft_len: int) -> np.ndarray:
    spec = np.fft.rfft(frames, n=fft_len, axis=-1)
    return spec.real**2 + spec.imag**2


def mel_energies(frame, mel: MelConfig, sample_rate_hz: int, fft_len: Optional[int] = None):
    """Filterbank energies E(b) of one windowed frame (or a stack of frames)."""
    frame = np.asarray(frame, dtype=np.float64)
    if fft_len is None:
        fft_len = 1 << (frame.shape[-1] - 1).bit_length()
    fb = mel_filterbank(mel, sample_rate_hz, fft_len)
    return power_spectrum(frame, fft_len) @ fb.T


@functools.lru_cache(maxsize=16)
def dct_matrix(num_filters: int, num_coeffs: int) -> np.ndarray:
    l = np.arange(num_coeffs)[:, None]
    b = np.arange(num_filters)[None, :]
    m = np.cos(l * np.pi / num_filters * (b + 0.5))
    m.setflags(write=False)
    return m


def mfcc_frame(E, mel: MelConfig) -> np.ndarray:
    """Cepstral coefficients l = 0 .. num_coeffs-1 from filterbank energies."""
    E = np.asarray(E, dtype=np.float64)
    if E.shape[-1] != mel.num_filters:
        raise ValueError(f"expected {mel.num_filters} energies, got {E.shape[-1]}")
    if np.any(E < 0):
        raise ValueError("filterbank energies must be non-negative")
    return np.log10(1.0 + E) @ dct_matrix(mel.num_filters, mel.num_coeffs).T


def channel_mfcc(x, sample_rate_hz: int, fcfg: FrameConfig, mel: MelConfig) -> np.ndarray:
    """Per-frame MFCC matrix (n_frames, num_coeffs) for one channel."""
    frames = frame_signal(pre_emphasize(x, fcfg.preemph_coeff), fcfg)
    E = mel_energies(frames, mel, sample_rate_hz, fcfg.fft_len)
    return mfcc_frame(E, mel)


def extract_clip_feature(
    y: StereoClip,
    fcfg: Optional[FrameConfig] = None,
    mel: Optional[MelConfig] = None,
    label: Optional[str] = None,
    provenance: str = "",
) -> ClipFeature:
    if fcfg is None:
        fcfg = FrameConfig.for_rate(y.sample_rate_hz)
    if mel is None:
        mel = MelConfig()
    halves = [
        channel_mfcc(ch, y.sample_rate_hz, fcfg, mel).mean(axis=0) for ch in (y.left, y.right)
    ]
    return ClipFeature(np.concatenate(halves), label=label, provenance=provenance)


STATS_HEADER = ["component", "channel", "label", "min", "q1", "median", "q3", "max", "mean"]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dump_feature_stats(features: Sequence[ClipFeature], path) -> None:
    """Write per-component five-number summaries and means, grouped by label.

    Quartiles use linear interpolation between order statistics. Rows are
    ordered by channel, component, then label.
    """
    if not features:
        raise ValueError("no features to summarize")
    dims = {f.values.size for f in features}
    if len(dims) != 1:
        raise ValueError(f"features have mixed dimensions {sorted(dims)}")
    half = dims.pop() // 2
    labels = sorted({f.label if f.label is not None else "unlabeled" for f in features})
    groups = {
        lab: np.stack(
            [f.values for f in features if (f.label if f.label is not None else "unlabeled") == lab]
        )
        for lab in labels
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        for ch_idx, channel in enumerate(("left", "right")):
            for comp in range(half):
                col = ch_idx * half + comp
                for lab in labels:
                    v = groups[lab][:, col]
                    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
                    w.writerow(
                        [comp, channel, lab]
                        + [_fmt(s) for s in (v.min(), q1, med, q3, v.max(), v.mean())]
                    )
