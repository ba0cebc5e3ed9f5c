"""Fake stereo audio: forgery synthesis, MFCC features, and paired-SVM detection."""

__version__ = "0.1.0"

from .audio_io import MonoClip, StereoClip, read_wav, segment_clip, to_mono, write_wav
from .corpus import build_corpus, load_manifest, save_manifest, synthesize_sources
from .detector import (
    DetectorModel,
    Verdict,
    detect,
    detect_with_copy_check,
    load_detector,
    save_detector,
    train_detector,
)
from .evaluation import cross_evaluate, evaluate, render_report
from .features import ClipFeature, FrameConfig, MelConfig, extract_clip_feature
from .forgery import FakedSide, FilterSpec, fake_stereo_copy, fake_stereo_haas, high_pass_filter, is_channel_copy
from .svm import SvmModel, TrainingSet, decide, load_model, save_model, train

__all__ = [
    "ClipFeature", "DetectorModel", "FakedSide", "FilterSpec", "FrameConfig", "MelConfig",
    "MonoClip", "StereoClip", "SvmModel", "TrainingSet", "Verdict",
    "build_corpus", "cross_evaluate", "decide", "detect", "detect_with_copy_check",
    "evaluate", "extract_clip_feature", "fake_stereo_copy", "fake_stereo_haas",
    "high_pass_filter", "is_channel_copy", "load_detector", "load_manifest", "load_model",
    "read_wav", "render_report", "save_detector", "save_manifest", "save_model",
    "segment_clip", "synthesize_sources", "to_mono", "train", "train_detector", "write_wav",
]
