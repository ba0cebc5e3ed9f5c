"""Labeled real/fake corpora on disk.

A corpus is a directory of 16-bit WAV files plus a manifest CSV. Real stereo
sources are cut into fixed-length segments; each segment is kept as a real
clip and reduced to mono, and that mono signal is forged into one fake per
(cut-off, faked side). Sources, not segments, are the unit of the train/test
split, so every clip derived from one source lands in the same split.
"""
from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .audio_io import (
    CORPUS_RATES,
    MONO_POLICIES,
    StereoClip,
    read_wav,
    segment_clip,
    to_mono,
    write_wav,
)
from .forgery import FakedSide, FilterSpec, fake_stereo_copy, fake_stereo_haas

log = logging.getLogger(__name__)

DEFAULT_TRAIN_CUTOFFS = (200.0,)
DEFAULT_TEST_CUTOFFS = (200.0, 400.0, 600.0, 800.0, 1000.0)
DEFAULT_SPLIT = 0.6
DEFAULT_SEED = 42

MANIFEST_COLUMNS = [
    "path", "label", "method", "faked_side", "cutoff_hz", "split",
    "source_clip_id", "sample_rate_hz", "duration_s",
]
MANIFEST_MAGIC = "fakestereo-manifest"
MANIFEST_VERSION = "1"

METHODS = ("original", "haas", "copy")


class ManifestError(ValueError):
    """Manifest failed schema or file-existence validation."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str  # relative to the manifest's directory
    label: str  # "real" | "fake"
    method: str  # "original" | "haas" | "copy"
    faked_side: Optional[str]
    cutoff_hz: Optional[float]
    split: str  # "train" | "test"
    source_clip_id: str
    sample_rate_hz: int
    duration_s: float

    def validate(self) -> None:
        where = f"entry {self.path!r}"
        if self.label not in ("real", "fake"):
            raise ManifestError(f"{where}: label must be real or fake, got {self.label!r}")
        if self.split not in ("train", "test"):
            raise ManifestError(f"{where}: split must be train or test, got {self.split!r}")
        if self.method not in METHODS:
            raise ManifestError(f"{where}: unknown method {self.method!r}")
        if self.faked_side is not None and self.faked_side not in ("left", "right"):
            raise ManifestError(f"{where}: faked_side must be left or right")
        if self.label == "real":
            if self.method != "original" or self.faked_side is not None or self.cutoff_hz is not None:
                raise ManifestError(f"{where}: real entries carry no forgery parameters")
        else:
            if self.method == "original":
                raise ManifestError(f"{where}: fake entries need a forgery method")
            if self.faked_side is None:
                raise ManifestError(f"{where}: fake entry without faked_side")
            if self.method == "haas" and self.cutoff_hz is None:
                raise ManifestError(f"{where}: haas fake without cutoff_hz")
            if self.method == "copy" and self.cutoff_hz is not None:
                raise ManifestError(f"{where}: copy fakes have no cutoff_hz")
        if self.sample_rate_hz <= 0 or not self.duration_s > 0:
            raise ManifestError(f"{where}: non-positive rate or duration")


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry]
    corpus_id: str
    mono_policy: str = "left-channel"
    split_ratio: float = DEFAULT_SPLIT
    seed: int = DEFAULT_SEED
    root: Path = field(default_factory=Path, compare=False)

    def abspath(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path

    def select(self, split=None, label=None, faked_side=None, cutoff_hz=None,
               method=None) -> list[ManifestEntry]:
        out = []
        for e in self.entries:
            if split is not None and e.split != split:
                continue
            if label is not None and e.label != label:
                continue
            if faked_side is not None and e.faked_side != FakedSide.parse(faked_side).value:
                continue
            if cutoff_hz is not None and e.cutoff_hz != float(cutoff_hz):
                continue
            if method is not None and e.method != method:
                continue
            out.append(e)
        return out

    def cutoffs(self, split: str) -> list[float]:
        return sorted({e.cutoff_hz for e in self.entries
                       if e.split == split and e.cutoff_hz is not None})


# -- synthetic sources -------------------------------------------------------

def _band_noise(rng: np.random.Generator, n: int, rate: int, lo: float, hi: float) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / rate)
    spec[(freqs < lo) | (freqs > hi)] = 0.0
    x = np.fft.irfft(spec, n)
    return x / np.sqrt(np.mean(x * x))


def synth_stereo(rng: np.random.Generator, n: int, rate: int) -> StereoClip:
    """One pseudo-random stereo clip.

    A clip draws one noise band and 2-5 sinusoids. Each channel mixes these
    shared components with its own random gains and adds its own
    independent band-limited ambience noise, so the channels are correlated
    but never identical. Each channel is peak-normalized to 0.9.
    """
    nyq = rate / 2.0
    lo = rng.uniform(20.0, 80.0)
    hi = min(rng.uniform(2000.0, 10000.0), 0.95 * nyq)
    t = np.arange(n) / rate
    components = [_band_noise(rng, n, rate, lo, hi)]
    for _ in range(int(rng.integers(2, 6))):
        f = math.exp(rng.uniform(math.log(40.0), math.log(min(4000.0, 0.45 * nyq))))
        amp = rng.uniform(0.2, 1.0)
        components.append(amp * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)))
    chans = []
    for _ in range(2):
        gains = rng.uniform(0.8, 1.0, size=len(components))
        x = sum(g * c for g, c in zip(gains, components))
        x = x + rng.uniform(0.05, 0.2) * _band_noise(rng, n, rate, lo, hi)
        chans.append(0.9 * x / np.max(np.abs(x)))
    return StereoClip(chans[0], chans[1], rate)


def synthesize_sources(n_clips: int, duration_s: float, rate: int, seed: int,
                       out_dir) -> list[Path]:
    """Write `n_clips` reproducible stereo WAVs named src_00000.wav, ..."""
    if n_clips <= 0:
        raise ValueError("n_clips must be positive")
    n = int(round(duration_s * rate))
    if n <= 0:
        raise ValueError("duration too short for one sample")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(n_clips):
        p = out_dir / f"src_{i:05d}.wav"
        write_wav(synth_stereo(rng, n, rate), p)
        paths.append(p)
    return paths


# -- building ----------------------------------------------------------------

_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _cutoff_tag(c: float) -> str:
    return f"{c:g}hz"


def real_name(source_id: str, segment: int) -> str:
    return f"{source_id}_s{segment:04d}"


def fake_name(real_stem: str, method: str, side: str, cutoff: Optional[float]) -> str:
    if method == "copy":
        return f"{real_stem}__copy.wav"
    return f"{real_stem}__haas_{side}_{_cutoff_tag(cutoff)}.wav"


def real_sibling(entry: ManifestEntry) -> str:
    """Relative path of the real clip a fake entry was derived from."""
    stem = Path(entry.path).name.rsplit("__", 1)[0]
    return f"real/{stem}.wav"


def assign_splits(source_ids: Sequence[str], split: float, seed: int) -> dict[str, str]:
    """Seeded shuffle of sources; the first floor(split * n) go to train."""
    n = len(source_ids)
    n_train = int(math.floor(split * n + 1e-9))
    order = np.random.default_rng(seed).permutation(n)
    train = {source_ids[k] for k in order[:n_train]}
    return {sid: ("train" if sid in train else "test") for sid in source_ids}


def _source_ids(paths: Sequence[Path]) -> list[str]:
    ids, seen = [], {}
    for p in paths:
        base = _SAFE.sub("-", p.stem) or "src"
        base = base.replace("__", "_")
        k = seen.get(base, 0)
        seen[base] = k + 1
        ids.append(base if k == 0 else f"{base}-{k}")
    return ids


def build_corpus(
    sources: Iterable,
    out_dir,
    train_cutoffs: Sequence[float] = DEFAULT_TRAIN_CUTOFFS,
    test_cutoffs: Sequence[float] = DEFAULT_TEST_CUTOFFS,
    split: float = DEFAULT_SPLIT,
    mono_policy: str = "left-channel",
    seed: int = DEFAULT_SEED,
    corpus_id: Optional[str] = None,
    segment_s: float = 1.0,
    include_copy: bool = False,
    sides: Sequence = (FakedSide.RIGHT, FakedSide.LEFT),
) -> CorpusManifest:
    """Segment stereo sources, forge fakes, and write WAVs plus manifest.csv."""
    if not 0 < split < 1:
        raise ValueError(f"split must lie in (0, 1), got {split!r}")
    if mono_policy not in MONO_POLICIES:
        raise ValueError(f"unknown mono policy {mono_policy!r}")
    cutoff_sets = {"train": [float(c) for c in train_cutoffs],
                   "test": [float(c) for c in test_cutoffs]}
    for c in cutoff_sets["train"] + cutoff_sets["test"]:
        if not c > 0:
            raise ValueError(f"cut-off frequencies must be positive, got {c!r}")
    sides = [FakedSide.parse(s) for s in sides]
    sources = sorted((Path(p) for p in sources), key=lambda p: str(p))
    if not sources:
        raise ValueError("no source files given")

    out_dir = Path(out_dir)
    (out_dir / "real").mkdir(parents=True, exist_ok=True)
    (out_dir / "fake").mkdir(parents=True, exist_ok=True)
    corpus_id = corpus_id or _SAFE.sub("-", out_dir.name) or "corpus"

    ids = _source_ids(sources)
    splits = assign_splits(ids, split, seed)
    max_cut = max(cutoff_sets["train"] + cutoff_sets["test"], default=0.0)

    entries: list[ManifestEntry] = []
    for path, sid in zip(sources, ids):
        clip = read_wav(path)
        if not isinstance(clip, StereoClip):
            raise ValueError(f"{path}: corpus sources must be stereo")
        rate = clip.sample_rate_hz
        if rate not in CORPUS_RATES:
            log.warning("%s: unusual sample rate %d Hz", path, rate)
        if rate < 2 * max_cut or max_cut >= rate / 2:
            raise ValueError(f"{path}: {rate} Hz is too low for a {max_cut:g} Hz cut-off")
        part = splits[sid]
        for k, seg in enumerate(segment_clip(clip, segment_s)):
            stem = real_name(sid, k)
            dur = len(seg) / rate
            rel = f"real/{stem}.wav"
            write_wav(seg, out_dir / rel)
            entries.append(ManifestEntry(rel, "real", "original", None, None, part, sid, rate, dur))
            mono = to_mono(seg, mono_policy)
            for cut in cutoff_sets[part]:
                spec = FilterSpec.for_rate(cut, rate)
                for side in sides:
                    rel = "fake/" + fake_name(stem, "haas", side.value, cut)
                    write_wav(fake_stereo_haas(mono, spec, side), out_dir / rel)
                    entries.append(ManifestEntry(rel, "fake", "haas", side.value, cut, part,
                                                 sid, rate, dur))
            if include_copy:
                rel = "fake/" + fake_name(stem, "copy", "right", None)
                write_wav(fake_stereo_copy(mono), out_dir / rel)
                entries.append(ManifestEntry(rel, "fake", "copy", "right", None, part,
                                             sid, rate, dur))

    manifest = CorpusManifest(entries, corpus_id, mono_policy, float(split), int(seed), out_dir)
    save_manifest(manifest, out_dir / "manifest.csv")
    log.info("corpus %s: %d entries from %d sources", corpus_id, len(entries), len(sources))
    return manifest


def rederive(manifest: CorpusManifest, entry: ManifestEntry) -> StereoClip:
    """Recreate a fake clip from its real sibling and recorded parameters."""
    if entry.label != "fake":
        raise ValueError("only fake entries can be re-derived")
    real = read_wav(manifest.root / real_sibling(entry))
    mono = to_mono(real, manifest.mono_policy)
    if entry.method == "copy":
        return fake_stereo_copy(mono)
    spec = FilterSpec.for_rate(entry.cutoff_hz, entry.sample_rate_hz)
    return fake_stereo_haas(mono, spec, entry.faked_side)


# -- manifest I/O ------------------------------------------------------------

def _fmt_opt(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def save_manifest(manifest: CorpusManifest, path) -> None:
    if not manifest.corpus_id or _SAFE.search(manifest.corpus_id):
        raise ManifestError(f"corpus_id {manifest.corpus_id!r} must be [A-Za-z0-9._-]")
    meta = (f"# {MANIFEST_MAGIC} v{MANIFEST_VERSION} corpus_id={manifest.corpus_id} "
            f"mono_policy={manifest.mono_policy} split_ratio={manifest.split_ratio!r} "
            f"seed={manifest.seed}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(meta + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for e in manifest.entries:
            w.writerow([
                e.path, e.label, e.method, _fmt_opt(e.faked_side), _fmt_opt(e.cutoff_hz),
                e.split, e.source_clip_id, str(e.sample_rate_hz), repr(float(e.duration_s)),
            ])


def _parse_meta(line: str) -> dict[str, str]:
    tokens = line.lstrip("#").split()
    if len(tokens) < 2 or tokens[0] != MANIFEST_MAGIC:
        raise ManifestError("missing manifest metadata line")
    if tokens[1] != f"v{MANIFEST_VERSION}":
        raise ManifestError(f"unsupported manifest version {tokens[1]!r}")
    meta = {}
    for tok in tokens[2:]:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ManifestError(f"malformed metadata token {tok!r}")
        meta[key] = value
    missing = {"corpus_id", "mono_policy", "split_ratio", "seed"} - meta.keys()
    if missing:
        raise ManifestError(f"metadata lacks {sorted(missing)}")
    return meta


def load_manifest(path, check_files: bool = True) -> CorpusManifest:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        meta = _parse_meta(fh.readline())
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_COLUMNS:
            raise ManifestError(f"unexpected manifest columns {header!r}")
        entries = []
        for lineno, row in enumerate(reader, start=3):
            if len(row) != len(MANIFEST_COLUMNS):
                raise ManifestError(f"line {lineno}: expected {len(MANIFEST_COLUMNS)} fields")
            rec = dict(zip(MANIFEST_COLUMNS, row))
            try:
                e = ManifestEntry(
                    path=rec["path"], label=rec["label"], method=rec["method"],
                    faked_side=rec["faked_side"] or None,
                    cutoff_hz=float(rec["cutoff_hz"]) if rec["cutoff_hz"] else None,
                    split=rec["split"], source_clip_id=rec["source_clip_id"],
                    sample_rate_hz=int(rec["sample_rate_hz"]),
                    duration_s=float(rec["duration_s"]),
                )
            except ValueError as exc:
                raise ManifestError(f"line {lineno}: {exc}") from exc
            e.validate()
            entries.append(e)
    manifest = CorpusManifest(
        entries, meta["corpus_id"], meta["mono_policy"], float(meta["split_ratio"]),
        int(meta["seed"]), path.parent,
    )
    if manifest.mono_policy not in MONO_POLICIES:
        raise ManifestError(f"unknown mono policy {manifest.mono_policy!r}")
    leaked = split_leaks(manifest)
    if leaked:
        raise ManifestError(f"source clips in both splits: {sorted(leaked)}")
    if check_files:
        missing = [e.path for e in entries if not (manifest.root / e.path).is_file()]
        if missing:
            raise ManifestError("referenced files do not exist: " + ", ".join(missing))
    return manifest


def split_leaks(manifest: CorpusManifest) -> set[str]:
    """Source clip ids that appear in both train and test."""
    seen: dict[str, set[str]] = {}
    for e in manifest.entries:
        seen.setdefault(e.source_clip_id, set()).add(e.split)
    return {sid for sid, parts in seen.items() if len(parts) > 1}
