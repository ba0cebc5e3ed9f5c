import struct
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fakestereo.audio_io import (
    EmptyWavError,
    MonoClip,
    StereoClip,
    UnsupportedWavError,
    WavHeaderError,
    read_wav,
    segment_clip,
    to_mono,
    write_wav,
)


def _raw_wav(path, pcm, channels=1, rate=44100, width=2):
    with wave.open(str(path), "wb") as f:
        f.setnchannels(channels)
        f.setsampwidth(width)
        f.setframerate(rate)
        f.writeframes(pcm)


def test_zero_and_min_pcm_values(tmp_path):
    p = tmp_path / "a.wav"
    _raw_wav(p, np.array([0, -32768, 32767], dtype="<i2").tobytes())
    clip = read_wav(p)
    assert isinstance(clip, MonoClip)
    assert clip.samples[0] == 0.0
    assert clip.samples[1] == -1.0
    assert clip.samples[2] == 32767 / 32768


def test_write_amplitude_encoding(tmp_path):
    p = tmp_path / "a.wav"
    write_wav(MonoClip([1.0, 0.5, -1.0, 0.0, 3.0, -3.0], 44100), p)
    with wave.open(str(p), "rb") as f:
        pcm = np.frombuffer(f.readframes(6), dtype="<i2")
    assert pcm.tolist() == [32767, 16384, -32768, 0, 32767, -32768]


def test_round_trip_is_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    pcm = rng.integers(-32768, 32768, size=2 * 44100).astype("<i2")
    src = tmp_path / "src.wav"
    _raw_wav(src, pcm.tobytes(), channels=2)
    out = tmp_path / "out.wav"
    write_wav(read_wav(src), out)
    assert out.read_bytes() == src.read_bytes()


@given(st.lists(st.integers(-32768, 32767), min_size=1, max_size=200))
@settings(max_examples=50, deadline=None)
def test_grid_amplitudes_survive_round_trip(tmp_path_factory, ints):
    p = tmp_path_factory.mktemp("g") / "g.wav"
    samples = np.array(ints, dtype=float) / 32768
    write_wav(MonoClip(samples, 48000), p)
    back = read_wav(p)
    np.testing.assert_array_equal(back.samples, samples)
    assert back.sample_rate_hz == 48000


def test_stereo_interleaving(tmp_path):
    p = tmp_path / "s.wav"
    write_wav(StereoClip([0.5, 0.25], [-0.5, -0.25], 44100), p)
    clip = read_wav(p)
    assert isinstance(clip, StereoClip)
    assert clip.left.tolist() == [0.5, 0.25]
    assert clip.right.tolist() == [-0.5, -0.25]


def test_unequal_channels_rejected():
    with pytest.raises(ValueError):
        StereoClip([0.0, 0.1], [0.0], 44100)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        MonoClip([0.0, np.nan], 44100)


def test_malformed_header(tmp_path):
    p = tmp_path / "bad.wav"
    p.write_bytes(b"NOTAWAVEFILE" * 4)
    with pytest.raises(WavHeaderError):
        read_wav(p)


def test_unsupported_bit_depth(tmp_path):
    p = tmp_path / "8bit.wav"
    _raw_wav(p, bytes([128, 129, 130]), width=1)
    with pytest.raises(UnsupportedWavError):
        read_wav(p)


def test_non_pcm_codec(tmp_path):
    # IEEE float WAV: format tag 3
    data = struct.pack("<2f", 0.1, 0.2)
    fmt = struct.pack("<HHIIHH", 3, 1, 44100, 44100 * 4, 4, 32)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    p = tmp_path / "float.wav"
    p.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
    with pytest.raises(UnsupportedWavError):
        read_wav(p)


def test_empty_data(tmp_path):
    p = tmp_path / "empty.wav"
    _raw_wav(p, b"")
    with pytest.raises(EmptyWavError):
        read_wav(p)


def test_segment_ten_seconds_at_48k():
    clip = StereoClip(np.zeros(480000), np.zeros(480000), 48000)
    segs = segment_clip(clip, 1.0)
    assert len(segs) == 10
    assert all(len(s) == 48000 for s in segs)


def test_segment_drops_remainder():
    clip = MonoClip(np.arange(66150) / 66150, 44100)
    segs = segment_clip(clip, 1.0)
    assert len(segs) == 1
    np.testing.assert_array_equal(segs[0].samples, clip.samples[:44100])
    assert segment_clip(MonoClip(np.zeros(22050), 44100), 1.0) == []


def test_segment_rejects_non_positive():
    with pytest.raises(ValueError):
        segment_clip(MonoClip([0.0], 44100), 0)


@given(st.integers(1, 5000), st.floats(0.001, 0.2))
@settings(max_examples=50, deadline=None)
def test_segment_lengths_equal_and_bounded(n, seconds):
    clip = MonoClip(np.zeros(n), 8000)
    segs = segment_clip(clip, seconds)
    lengths = {len(s) for s in segs}
    assert len(lengths) <= 1
    assert sum(len(s) for s in segs) <= n


def test_to_mono_policies():
    clip = StereoClip([1.0, 0.0], [0.0, 1.0], 44100)
    assert to_mono(clip, "average").samples.tolist() == [0.5, 0.5]
    assert to_mono(clip, "right-channel").samples.tolist() == [0.0, 1.0]
    assert to_mono(clip).samples.tolist() == [1.0, 0.0]
    same = StereoClip([0.3, -0.7], [0.3, -0.7], 44100)
    for policy in ("left-channel", "right-channel", "average"):
        assert to_mono(same, policy).samples.tolist() == [0.3, -0.7]
    with pytest.raises(ValueError):
        to_mono(clip, "mid")


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=50))
def test_average_stays_in_range(pairs):
    left, right = zip(*pairs)
    m = to_mono(StereoClip(left, right, 44100), "average")
    assert np.all(np.abs(m.samples) <= 1.0)
