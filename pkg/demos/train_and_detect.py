"""
Training the two-classifier detector
====================================

Synthesizes a small stereo corpus, trains the right-faked and left-faked
SVMs on the train split, saves the detector, and classifies a few held-out
clips. A clip is called real only when both classifiers agree it is real.
"""

import sys
import tempfile
from pathlib import Path

from fakestereo import (build_corpus, detect_with_copy_check, fake_stereo_copy, load_detector,
                        read_wav, save_detector, synthesize_sources, to_mono)
from fakestereo.pipeline import train_from_manifest

work = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())

# 80 one-second sources; fakes at 200 Hz for training, 200 and 800 Hz for test
sources = synthesize_sources(80, 1.0, 44100, seed=7, out_dir=work / "sources")
manifest = build_corpus(sources, work / "corpus", train_cutoffs=[200],
                        test_cutoffs=[200, 800], split=0.6, seed=7, corpus_id="demo")
print(len(manifest.entries), "clips in", work / "corpus")

model = train_from_manifest(manifest, C=0.4)
save_detector(model, work / "demo.det")
model = load_detector(work / "demo.det")
print("detector saved and reloaded from", work / "demo.det")

# a few test clips of each kind
picks = (manifest.select(split="test", label="real")[:3]
         + manifest.select(split="test", label="fake", faked_side="right")[:3]
         + manifest.select(split="test", label="fake", faked_side="left")[:3])
for e in picks:
    v = detect_with_copy_check(model, read_wav(manifest.abspath(e)))
    kind = e.label if e.label == "real" else f"fake ({e.faked_side}, {e.cutoff_hz:g} Hz)"
    print(f"{kind:24s} -> {v.label:4s}  1st {v.score_1st:+.3f}  2nd {v.score_2nd:+.3f}")

# a copy fake never reaches the SVMs
v = detect_with_copy_check(model, fake_stereo_copy(to_mono(read_wav(manifest.abspath(picks[0])))))
print("channel copy ->", v.label, "(copy check)" if v.copy_detected else "")
