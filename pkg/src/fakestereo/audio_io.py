"""WAV input/output and clip containers.

Audio lives in memory as float64 arrays normalized to [-1, 1]. On disk only
16-bit signed PCM RIFF/WAVE, mono or interleaved stereo, is supported.
"""
from __future__ import annotations

import wave
from dataclasses import dataclass
from os import PathLike
from typing import Union

import numpy as np

CORPUS_RATES = (44100, 48000)
PCM_SCALE = 32768.0

MONO_POLICIES = ("left-channel", "right-channel", "average")


class WavError(Exception):
    """Base class for WAV parsing failures."""


class WavHeaderError(WavError):
    """The container is not a well-formed RIFF/WAVE file."""


class UnsupportedWavError(WavError):
    """Well-formed WAV, but not 16-bit PCM with 1 or 2 channels."""


class EmptyWavError(WavError):
    """The data chunk holds no sample frames."""


def _as_samples(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"samples must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("samples must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples contain non-finite values")
    arr.setflags(write=False)
    return arr


def _check_rate(rate) -> int:
    if int(rate) != rate or rate <= 0:
        raise ValueError(f"sample rate must be a positive integer, got {rate!r}")
    return int(rate)


@dataclass(frozen=True, eq=False)
class MonoClip:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_samples(self.samples))
        object.__setattr__(self, "sample_rate_hz", _check_rate(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def sample_period_s(self) -> float:
        return 1.0 / self.sample_rate_hz

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class StereoClip:
    left: np.ndarray
    right: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        left = _as_samples(self.left)
        right = _as_samples(self.right)
        if left.size != right.size:
            raise ValueError(
                f"channel lengths differ: left={left.size}, right={right.size}"
            )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "sample_rate_hz", _check_rate(self.sample_rate_hz))

    def __len__(self):
        return self.left.size

    @property
    def duration_s(self) -> float:
        return self.left.size / self.sample_rate_hz

    def swapped(self) -> "StereoClip":
        return StereoClip(self.right, self.left, self.sample_rate_hz)


Clip = Union[MonoClip, StereoClip]


def read_wav(path: str | PathLike) -> Clip:
    """Load a 16-bit PCM WAV file.

    Integer samples are divided by 32768, so -32768 maps to exactly -1.0.
    Returns a MonoClip for one channel and a StereoClip for two.
    """
    try:
        with wave.open(str(path), "rb") as f:
            n_channels = f.getnchannels()
            width = f.getsampwidth()
            rate = f.getframerate()
            n_frames = f.getnframes()
            raw = f.readframes(n_frames)
    except wave.Error as exc:
        msg = str(exc)
        if msg.startswith("unknown format"):
            raise UnsupportedWavError(f"{path}: non-PCM codec ({msg})") from exc
        raise WavHeaderError(f"{path}: {msg}") from exc
    except EOFError as exc:
        raise WavHeaderError(f"{path}: truncated header") from exc

    if width != 2:
        raise UnsupportedWavError(f"{path}: {8 * width}-bit samples, only 16-bit supported")
    if n_channels not in (1, 2):
        raise UnsupportedWavError(f"{path}: {n_channels} channels, only 1 or 2 supported")
    if n_frames == 0 or len(raw) == 0:
        raise EmptyWavError(f"{path}: no sample frames")
    if len(raw) != n_frames * n_channels * 2:
        raise WavHeaderError(f"{path}: data chunk shorter than declared frame count")

    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64) / PCM_SCALE
    if n_channels == 1:
        return MonoClip(pcm, rate)
    return StereoClip(pcm[0::2], pcm[1::2], rate)


def _to_pcm(samples: np.ndarray) -> np.ndarray:
    scaled = np.round(np.asarray(samples, dtype=np.float64) * PCM_SCALE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(clip: Clip, path: str | PathLike) -> None:
    """Write a clip as 16-bit PCM; amplitudes outside the PCM range are clamped."""
    if isinstance(clip, StereoClip):
        if clip.left.size != clip.right.size:
            raise ValueError("stereo channels must have equal length")
        pcm = np.empty(2 * clip.left.size, dtype="<i2")
        pcm[0::2] = _to_pcm(clip.left)
        pcm[1::2] = _to_pcm(clip.right)
        n_channels = 2
    elif isinstance(clip, MonoClip):
        pcm = _to_pcm(clip.samples)
        n_channels = 1
    else:
        raise TypeError(f"expected MonoClip or StereoClip, got {type(clip).__name__}")

    with wave.open(str(path), "wb") as f:
        f.setnchannels(n_channels)
        f.setsampwidth(2)
        f.setframerate(clip.sample_rate_hz)
        f.writeframes(pcm.tobytes())


def quantize(clip: Clip) -> Clip:
    """Return the clip exactly as it would read back after write_wav."""
    if isinstance(clip, StereoClip):
        return StereoClip(
            _to_pcm(clip.left) / PCM_SCALE, _to_pcm(clip.right) / PCM_SCALE, clip.sample_rate_hz
        )
    return MonoClip(_to_pcm(clip.samples) / PCM_SCALE, clip.sample_rate_hz)


def segment_clip(clip: Clip, seconds: float) -> list[Clip]:
    """Cut a clip into consecutive non-overlapping windows of `seconds`.

    A trailing remainder shorter than one window is dropped.
    """
    if not seconds > 0:
        raise ValueError(f"segment length must be positive, got {seconds!r}")
    width = int(np.floor(seconds * clip.sample_rate_hz))
    if width < 1:
        raise ValueError(f"{seconds} s is shorter than one sample at {clip.sample_rate_hz} Hz")
    count = len(clip) // width
    out: list[Clip] = []
    for k in range(count):
        sl = slice(k * width, (k + 1) * width)
        if isinstance(clip, StereoClip):
            out.append(StereoClip(clip.left[sl], clip.right[sl], clip.sample_rate_hz))
        else:
            out.append(MonoClip(clip.samples[sl], clip.sample_rate_hz))
    return out


def to_mono(clip: StereoClip, policy: str = "left-channel") -> MonoClip:
    if policy == "left-channel":
        samples = clip.left
    elif policy == "right-channel":
        samples = clip.right
    elif policy == "average":
        samples = 0.5 * (clip.left + clip.right)
    else:
        raise ValueError(f"unknown mono policy {policy!r}; expected one of {MONO_POLICIES}")
    return MonoClip(samples, clip.sample_rate_hz)
