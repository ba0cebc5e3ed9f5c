"""Fake stereo synthesis from a mono source.

Two forgeries are supported. Channel Copy duplicates the mono channel into
both outputs. The Haas-style forgery keeps the mono channel on one side and
puts a one-pole high-pass filtered copy on the other.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .audio_io import MonoClip, StereoClip


class FakedSide(str, enum.Enum):
    """Which output channel carries the filtered copy."""

    RIGHT = "right"  # mono source on the left, filtered copy on the right
    LEFT = "left"

    @classmethod
    def parse(cls, value) -> "FakedSide":
        if isinstance(value, cls):
            return value
        text = str(value).lower().removesuffix("-faked")
        return cls(text)


@dataclass(frozen=True)
class FilterSpec:
    cutoff_hz: float
    sample_period_s: float

    def __post_init__(self):
        if not (self.cutoff_hz > 0 and math.isfinite(self.cutoff_hz)):
            raise ValueError(f"cut-off must be a positive finite frequency, got {self.cutoff_hz!r}")
        if not self.sample_period_s > 0:
            raise ValueError(f"sample period must be positive, got {self.sample_period_s!r}")
        nyquist = 0.5 / self.sample_period_s
        if self.cutoff_hz >= nyquist:
            raise ValueError(
                f"cut-off {self.cutoff_hz} Hz is not below the Nyquist frequency {nyquist:g} Hz"
            )

    @classmethod
    def for_rate(cls, cutoff_hz: float, sample_rate_hz: int) -> "FilterSpec":
        return cls(float(cutoff_hz), 1.0 / sample_rate_hz)

    @property
    def alpha(self) -> float:
        return 1.0 / (1.0 + 2.0 * math.pi * self.cutoff_hz * self.sample_period_s)

    @property
    def sample_rate_hz(self) -> float:
        return 1.0 / self.sample_period_s


def high_pass_filter(x: MonoClip, spec: FilterSpec) -> MonoClip:
    """One-pole high-pass: y[l] = alpha * (x[l] - x[l-1] + y[l-1]), x[0] = y[0] = 0."""
    if not math.isclose(spec.sample_period_s * x.sample_rate_hz, 1.0, rel_tol=1e-9):
        raise ValueError(
            f"filter designed for {spec.sample_rate_hz:g} Hz applied to a "
            f"{x.sample_rate_hz} Hz clip"
        )
    a = spec.alpha
    # zero initial state in lfilter matches the zero predecessors above
    y = lfilter([a, -a], [1.0, -a], x.samples)
    return MonoClip(y, x.sample_rate_hz)


def fake_stereo_copy(x: MonoClip) -> StereoClip:
    return StereoClip(x.samples, x.samples, x.sample_rate_hz)


def fake_stereo_haas(x: MonoClip, spec: FilterSpec, side=FakedSide.RIGHT) -> StereoClip:
    filtered = high_pass_filter(x, spec).samples
    if FakedSide.parse(side) is FakedSide.RIGHT:
        return StereoClip(x.samples, filtered, x.sample_rate_hz)
    return StereoClip(filtered, x.samples, x.sample_rate_hz)


def is_channel_copy(y: StereoClip, tolerance: float = 0.0) -> bool:
    """True when the two channels agree sample-for-sample within `tolerance`."""
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    return bool(np.max(np.abs(y.left - y.right)) <= tolerance)
