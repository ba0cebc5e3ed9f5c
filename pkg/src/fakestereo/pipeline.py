"""Glue between manifests on disk and the feature/detector layers."""
from __future__ import annotations

import logging
from typing import Optional, Sequence

from . import svm
from .audio_io import StereoClip, read_wav
from .corpus import CorpusManifest, ManifestEntry
from .detector import DetectorModel, train_detector
from .features import ClipFeature, FrameConfig, MelConfig, extract_clip_feature
from .forgery import is_channel_copy

log = logging.getLogger(__name__)


class FeatureStore:
    """Memoized per-file feature extraction.

    Keys include the feature configuration, so one store can serve models
    trained with different framing.
    """

    def __init__(self):
        self._cache: dict = {}

    def __len__(self):
        return len(self._cache)

    def get(self, path, frame: FrameConfig, mel: MelConfig, label=None) -> tuple[ClipFeature, bool]:
        key = (str(path), frame, mel)
        hit = self._cache.get(key)
        if hit is None:
            clip = read_wav(path)
            if not isinstance(clip, StereoClip):
                raise ValueError(f"{path}: expected a stereo clip")
            feat = extract_clip_feature(clip, frame, mel, provenance=str(path))
            hit = (feat, is_channel_copy(clip, 0.0))
            self._cache[key] = hit
        feat, copy = hit
        if label is not None and feat.label != label:
            feat = ClipFeature(feat.values, label=label, provenance=feat.provenance)
        return feat, copy


def manifest_rate(manifest: CorpusManifest) -> int:
    rates = {e.sample_rate_hz for e in manifest.entries}
    if len(rates) != 1:
        raise ValueError(f"corpus {manifest.corpus_id} mixes sample rates {sorted(rates)}")
    return rates.pop()


def features_for(manifest: CorpusManifest, entries: Sequence[ManifestEntry],
                 frame: FrameConfig, mel: MelConfig,
                 store: Optional[FeatureStore] = None) -> list[ClipFeature]:
    store = store if store is not None else FeatureStore()
    return [store.get(manifest.abspath(e), frame, mel, label=e.label)[0] for e in entries]


def train_from_manifest(manifest: CorpusManifest, C: float = svm.DEFAULT_C,
                        frame: Optional[FrameConfig] = None, mel: Optional[MelConfig] = None,
                        store: Optional[FeatureStore] = None) -> DetectorModel:
    """Train both classifiers on the manifest's train split (Haas fakes only)."""
    rate = manifest_rate(manifest)
    frame = frame or FrameConfig.for_rate(rate)
    mel = (mel or MelConfig()).resolved(rate)
    real = manifest.select(split="train", label="real")
    right = manifest.select(split="train", label="fake", method="haas", faked_side="right")
    left = manifest.select(split="train", label="fake", method="haas", faked_side="left")
    store = store if store is not None else FeatureStore()
    return train_detector(
        features_for(manifest, real, frame, mel, store),
        features_for(manifest, right, frame, mel, store),
        features_for(manifest, left, frame, mel, store),
        C=C, frame=frame, mel=mel, sample_rate_hz=rate, corpus_id=manifest.corpus_id,
    )
