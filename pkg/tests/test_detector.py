import itertools

import numpy as np
import pytest

from fakestereo import detector as det
from fakestereo import svm
from fakestereo.audio_io import MonoClip, StereoClip
from fakestereo.detector import (
    detect,
    detect_with_copy_check,
    fuse,
    load_detector,
    save_detector,
    train_detector,
    verdict_from_scores,
)
from fakestereo.features import ClipFeature
from fakestereo.forgery import FilterSpec, fake_stereo_copy, fake_stereo_haas


def _toy_sets(seed=0, n=40):
    rng = np.random.default_rng(seed)
    real = [ClipFeature(rng.normal(0, 1, 80)) for _ in range(n)]
    right = [ClipFeature(rng.normal(0, 1, 80) + np.r_[np.zeros(40), -4 * np.ones(40)]) for _ in range(n)]
    left = [ClipFeature(rng.normal(0, 1, 80) + np.r_[-4 * np.ones(40), np.zeros(40)]) for _ in range(n)]
    return real, right, left


@pytest.fixture(scope="module")
def toy_model():
    return train_detector(*_toy_sets())


@pytest.mark.parametrize("l1,l2", list(itertools.product([1, -1], repeat=2)))
def test_fusion_truth_table(l1, l2):
    expected = 1 if (l1 == 1 and l2 == 1) else -1
    assert fuse(l1, l2) == expected
    v = verdict_from_scores(float(l1), float(l2))
    assert v.label == ("real" if expected == 1 else "fake")
    assert v.is_fake == (v.label_1st == "fake" or v.label_2nd == "fake")


def test_toy_training_separates(toy_model):
    real, right, left = _toy_sets()
    for feats, m, want in ((real, toy_model.svm_right_faked, 1), (right, toy_model.svm_right_faked, -1),
                           (real, toy_model.svm_left_faked, 1), (left, toy_model.svm_left_faked, -1)):
        assert all(svm.decide(m, f)[1] == want for f in feats)
    assert toy_model.penalty == 0.4
    assert toy_model.svm_right_faked.faked_side == "right"
    assert toy_model.svm_left_faked.faked_side == "left"


def test_empty_set_rejected():
    real, right, _ = _toy_sets()
    with pytest.raises(ValueError):
        train_detector(real, right, [])


def _noise_stereo(seed, n=44100):
    rng = np.random.default_rng(seed)
    return StereoClip(rng.uniform(-0.5, 0.5, n), rng.uniform(-0.5, 0.5, n), 44100)


def test_detect_runs_and_is_deterministic(toy_model):
    clip = _noise_stereo(1)
    a, b = detect(toy_model, clip), detect(toy_model, clip)
    assert a == b and a.label in ("real", "fake")
    assert not a.copy_detected


def test_detect_short_clip_errors(toy_model):
    with pytest.raises(ValueError):
        detect(toy_model, _noise_stereo(2, n=500))


def test_detect_rate_mismatch(toy_model):
    rng = np.random.default_rng(0)
    clip = StereoClip(rng.uniform(-1, 1, 48000), rng.uniform(-1, 1, 48000), 48000)
    with pytest.raises(ValueError):
        detect(toy_model, clip)


def test_copy_fast_path_skips_svms(toy_model, monkeypatch):
    calls = []
    real_decide = svm.decide
    monkeypatch.setattr(svm, "decide", lambda *a: calls.append(1) or real_decide(*a))
    mono = MonoClip(np.random.default_rng(3).uniform(-1, 1, 44100), 44100)
    v = detect_with_copy_check(toy_model, fake_stereo_copy(mono))
    assert v.label == "fake" and v.copy_detected and v.score_1st is None
    assert calls == []
    haas = fake_stereo_haas(mono, FilterSpec.for_rate(200, 44100))
    v = detect_with_copy_check(toy_model, haas)
    assert not v.copy_detected and len(calls) == 2
    v = detect_with_copy_check(toy_model, _noise_stereo(4))
    assert v == detect(toy_model, _noise_stereo(4))
    v = detect_with_copy_check(toy_model, fake_stereo_copy(mono), copy_check=False)
    assert not v.copy_detected and v.score_1st is not None


def test_detector_round_trip(toy_model, tmp_path):
    p1, p2 = tmp_path / "a.det", tmp_path / "b.det"
    save_detector(toy_model, p1)
    loaded = load_detector(p1)
    save_detector(loaded, p2)
    assert p1.read_bytes() == p2.read_bytes()
    clip = _noise_stereo(5)
    assert detect(loaded, clip) == detect(toy_model, clip)
    text = p1.read_text(encoding="utf-8")
    assert "[svm.1st]" in text and "[svm.2nd]" in text


def test_detector_load_validates(toy_model, tmp_path):
    p = tmp_path / "a.det"
    save_detector(toy_model, p)
    text = p.read_text(encoding="utf-8")
    bad = tmp_path / "bad.det"
    bad.write_text(text.replace("kind = detector", "kind = svm"))
    with pytest.raises(svm.ModelFormatError):
        load_detector(bad)
    bad.write_text(text.replace("num_coeffs = 40", "num_coeffs = 20"))
    with pytest.raises(svm.ModelFormatError):
        load_detector(bad)


def test_detector_slot_tags(toy_model):
    with pytest.raises(ValueError):
        det.DetectorModel(toy_model.svm_left_faked, toy_model.svm_right_faked,
                          toy_model.frame, toy_model.mel, 44100)
