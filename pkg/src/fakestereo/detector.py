"""Two-classifier fake stereo detector with OR fusion.

The 1st SVM separates real stereo from clips whose right channel was faked;
the 2nd separates real stereo from clips whose left channel was faked. A clip
is real only when both classifiers say real.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import svm
from .audio_io import StereoClip
from .features import ClipFeature, FrameConfig, MelConfig, extract_clip_feature
from .forgery import FakedSide, is_channel_copy
from .svm import REAL, FAKE, SvmModel, TrainingSet

log = logging.getLogger(__name__)

LABEL_NAMES = {REAL: "real", FAKE: "fake"}


@dataclass(frozen=True)
class DetectorModel:
    svm_right_faked: SvmModel  # 1st classifier
    svm_left_faked: SvmModel  # 2nd classifier
    frame: FrameConfig
    mel: MelConfig
    sample_rate_hz: int
    corpus_id: str = ""

    def __post_init__(self):
        if self.svm_right_faked.dimension != self.svm_left_faked.dimension:
            raise ValueError("both classifiers must share the feature dimension")
        if self.svm_right_faked.dimension != 2 * self.mel.num_coeffs:
            raise ValueError("classifier dimension does not match the MFCC configuration")
        if self.svm_right_faked.faked_side != FakedSide.RIGHT.value:
            raise ValueError("1st classifier must be tagged faked_side=right")
        if self.svm_left_faked.faked_side != FakedSide.LEFT.value:
            raise ValueError("2nd classifier must be tagged faked_side=left")

    @property
    def penalty(self) -> float:
        return self.svm_right_faked.penalty

    def classifiers(self) -> tuple[SvmModel, SvmModel]:
        return self.svm_right_faked, self.svm_left_faked


@dataclass(frozen=True)
class Verdict:
    label: str
    score_1st: Optional[float]
    score_2nd: Optional[float]
    label_1st: Optional[str]
    label_2nd: Optional[str]
    copy_detected: bool = False

    @property
    def is_fake(self) -> bool:
        return self.label == "fake"


def fuse(label_1st: int, label_2nd: int) -> int:
    """Real only if both classifiers say real."""
    return REAL if (label_1st == REAL and label_2nd == REAL) else FAKE


def _labels(n: int, value: int) -> list[int]:
    return [value] * n


def train_detector(
    real: Sequence[ClipFeature],
    fake_rightfaked: Sequence[ClipFeature],
    fake_leftfaked: Sequence[ClipFeature],
    C: float = svm.DEFAULT_C,
    frame: Optional[FrameConfig] = None,
    mel: Optional[MelConfig] = None,
    sample_rate_hz: int = 44100,
    corpus_id: str = "",
    tol: float = svm.DEFAULT_TOL,
) -> DetectorModel:
    for name, group in (("real", real), ("fake_rightfaked", fake_rightfaked),
                        ("fake_leftfaked", fake_leftfaked)):
        if len(group) == 0:
            raise ValueError(f"{name} training set is empty")
    frame = frame or FrameConfig.for_rate(sample_rate_hz)
    mel = (mel or MelConfig()).resolved(sample_rate_hz)

    models = []
    for side, fakes in ((FakedSide.RIGHT, fake_rightfaked), (FakedSide.LEFT, fake_leftfaked)):
        ts = TrainingSet(list(real) + list(fakes),
                         _labels(len(real), REAL) + _labels(len(fakes), FAKE))
        log.info("training %s-faked classifier on %d real / %d fake clips",
                 side.value, len(real), len(fakes))
        models.append(svm.train(ts, C=C, tol=tol, faked_side=side.value, corpus_id=corpus_id))
    return DetectorModel(models[0], models[1], frame, mel, int(sample_rate_hz), corpus_id)


def verdict_from_scores(score_1st: float, score_2nd: float) -> Verdict:
    l1 = int(svm.sign_label(score_1st))
    l2 = int(svm.sign_label(score_2nd))
    return Verdict(LABEL_NAMES[fuse(l1, l2)], score_1st, score_2nd,
                   LABEL_NAMES[l1], LABEL_NAMES[l2])


def feature_for(model: DetectorModel, y: StereoClip) -> ClipFeature:
    if y.sample_rate_hz != model.sample_rate_hz:
        raise ValueError(
            f"clip is {y.sample_rate_hz} Hz but the detector was trained at {model.sample_rate_hz} Hz"
        )
    return extract_clip_feature(y, model.frame, model.mel)


def detect_feature(model: DetectorModel, feature: ClipFeature) -> Verdict:
    s1, _ = svm.decide(model.svm_right_faked, feature)
    s2, _ = svm.decide(model.svm_left_faked, feature)
    return verdict_from_scores(s1, s2)


def detect(model: DetectorModel, y: StereoClip) -> Verdict:
    return detect_feature(model, feature_for(model, y))


def copy_verdict() -> Verdict:
    return Verdict("fake", None, None, None, None, copy_detected=True)


def detect_with_copy_check(model: DetectorModel, y: StereoClip, copy_check: bool = True) -> Verdict:
    """Flag identical channels as fake immediately, otherwise run both SVMs."""
    if copy_check and is_channel_copy(y, 0.0):
        return copy_verdict()
    return detect(model, y)


# -- persistence -------------------------------------------------------------

def save_detector(model: DetectorModel, path) -> None:
    cp = svm.new_parser()
    cp["meta"] = {"kind": "detector", "schema_version": str(svm.SCHEMA_VERSION)}
    cp["detector"] = {"corpus_id": model.corpus_id, "sample_rate_hz": str(model.sample_rate_hz)}
    cp["frame"] = {
        "frame_len": str(model.frame.frame_len),
        "hop_len": str(model.frame.hop_len),
        "preemph_coeff": svm.fmt_float(model.frame.preemph_coeff),
    }
    cp["mel"] = {
        "num_filters": str(model.mel.num_filters),
        "min_hz": svm.fmt_float(model.mel.min_hz),
        "max_hz": svm.fmt_float(model.mel.max_hz),
        "num_coeffs": str(model.mel.num_coeffs),
    }
    cp["svm.1st"] = svm.model_to_section(model.svm_right_faked)
    cp["svm.2nd"] = svm.model_to_section(model.svm_left_faked)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svm.dumps_config(cp))


def load_detector(path) -> DetectorModel:
    cp = svm.new_parser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    svm.check_version(cp, "detector")
    for sec in ("detector", "frame", "mel", "svm.1st", "svm.2nd"):
        if not cp.has_section(sec):
            raise svm.ModelFormatError(f"missing [{sec}] section")
    try:
        fr, me = cp["frame"], cp["mel"]
        frame = FrameConfig(int(fr["frame_len"]), int(fr["hop_len"]), float(fr["preemph_coeff"]))
        mel = MelConfig(int(me["num_filters"]), float(me["min_hz"]), float(me["max_hz"]),
                        int(me["num_coeffs"]))
        return DetectorModel(
            svm.model_from_section(cp["svm.1st"]),
            svm.model_from_section(cp["svm.2nd"]),
            frame, mel,
            int(cp["detector"]["sample_rate_hz"]),
            cp["detector"].get("corpus_id", ""),
        )
    except KeyError as exc:
        raise svm.ModelFormatError(f"missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        if isinstance(exc, svm.ModelFormatError):
            raise
        raise svm.ModelFormatError(str(exc)) from exc


def batch_scores(model: DetectorModel, features: Sequence[ClipFeature]) -> np.ndarray:
    """(n, 2) array of 1st/2nd classifier scores."""
    X = np.stack([f.values for f in features])
    return np.column_stack([m.scores(X) for m in model.classifiers()])
