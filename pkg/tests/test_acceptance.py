"""Acceptance suite: each test checks one criterion at its stated tolerance.

Criteria 5-7 share one end-to-end run on a synthetic corpus (400 one-second
sources, seed 42); criterion 9 repeats that run in a fresh directory and
compares the artifacts byte for byte.
"""
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from fakestereo import svm
from fakestereo.audio_io import MonoClip, read_wav, to_mono
from fakestereo.corpus import build_corpus, synthesize_sources
from fakestereo.detector import detect_with_copy_check, fuse, save_detector
from fakestereo.evaluation import evaluate, render_report
from fakestereo.features import MelConfig, mfcc_frame
from fakestereo.forgery import FilterSpec, fake_stereo_copy, high_pass_filter
from fakestereo.pipeline import FeatureStore, train_from_manifest
from fakestereo.svm import REAL, FAKE, TrainingSet, fit_scaler, solve_dual

SEED = 42
TEST_CUTOFFS = (200.0, 400.0, 600.0, 800.0, 1000.0)


# -- 1-4: properties ----------------------------------------------------------

def test_1_filter_response(acceptance):
    t0 = time.perf_counter()
    n, rate = 8192, 44100
    impulse = np.zeros(n)
    impulse[0] = 1.0
    h = high_pass_filter(MonoClip(impulse, rate), FilterSpec.for_rate(200, rate)).samples
    H = np.abs(np.fft.rfft(h))
    freqs = np.fft.rfftfreq(n, 1 / rate)
    # magnitude at exactly 200 Hz by direct evaluation of the DTFT of h
    h200 = abs(np.sum(h * np.exp(-2j * np.pi * 200 * np.arange(n) / rate)))
    monotone = bool(np.all(np.diff(H) >= -1e-12))
    elapsed = time.perf_counter() - t0
    ok = H[0] < 1e-3 and 0.65 <= h200 <= 0.76 and monotone and elapsed < 1.0
    acceptance(1, "filter response", ok,
               f"|H(0)|={H[0]:.2e} |H(200)|={h200:.4f} monotone={monotone} "
               f"bins={len(freqs)} {elapsed:.3f}s")
    assert ok


def _mfcc_double_sum(E, L):
    B = len(E)
    return [sum(math.log10(1 + E[b]) * math.cos(l * math.pi / B * (b + 0.5)) for b in range(B))
            for l in range(L)]


def test_2_mfcc_oracle(acceptance):
    t0 = time.perf_counter()
    mel = MelConfig(num_filters=40, num_coeffs=40)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        E = rng.exponential(rng.uniform(0.1, 100), 40)
        got = mfcc_frame(E, mel)
        want = np.array(_mfcc_double_sum(E, 40))
        worst = max(worst, float(np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300)))
    const = mfcc_frame(np.full(40, 7.5), mel)
    flat = float(np.max(np.abs(const[1:])))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and flat < 1e-9 and elapsed < 1.0
    acceptance(2, "MFCC oracle equivalence", ok,
               f"max rel err={worst:.1e} constant |C(l>=1)|={flat:.1e} {elapsed:.3f}s")
    assert ok


def _blobs(n, seed, margin=1.0):
    rng = np.random.default_rng(seed)
    u = np.array([1.0, -1.0]) / np.sqrt(2)
    X, y = [], []
    while len(X) < n:
        label = 1 if len(X) < n // 2 else -1
        p = rng.normal(loc=[2.0 * label, -2.0 * label], scale=1.2)
        if label * (p @ u) >= margin:
            X.append(p)
            y.append(label)
    return np.array(X), np.array(y)


def _kkt_worst(alpha, y, margins, C, atol=1e-12):
    lo = alpha <= atol
    hi = alpha >= C - atol
    mid = ~lo & ~hi
    r = np.concatenate([
        np.maximum(0.0, 1.0 - margins[lo]),
        np.abs(margins[mid] - 1.0),
        np.maximum(0.0, margins[hi] - 1.0),
    ])
    return float(r.max()) if r.size else 0.0


def test_3_svm_soundness(acceptance):
    t0 = time.perf_counter()
    C = 0.4
    X, y = _blobs(200, SEED)
    model = svm.train(TrainingSet(X, y), C=C)
    train_acc = float(np.mean(svm.sign_label(model.scores(X)) == y))
    mean, std = fit_scaler(X)
    Z = (X - mean) / std
    sol = solve_dual(Z, y, C)
    balance = abs(float(np.sum(sol.alpha * y)))
    kkt = _kkt_worst(sol.alpha, y, y * (Z @ sol.w + sol.b), C)
    elapsed = time.perf_counter() - t0
    ok = train_acc == 1.0 and balance <= 1e-6 and kkt <= 1e-3 and elapsed < 5.0
    acceptance(3, "SVM soundness", ok,
               f"train acc={train_acc:.3f} |sum a*y|={balance:.1e} max KKT={kkt:.1e} "
               f"{elapsed:.3f}s")
    assert ok


def test_4_fusion_truth_table(acceptance):
    table = {(REAL, REAL): REAL, (REAL, FAKE): FAKE, (FAKE, REAL): FAKE, (FAKE, FAKE): FAKE}
    got = {k: fuse(*k) for k in table}
    ok = got == table
    acceptance(4, "fusion truth table", ok, "4/4 combinations" if ok else str(got))
    assert ok


# -- 5-9: end to end ----------------------------------------------------------

def run_protocol(root: Path) -> dict:
    """Sources, two corpora (train cut-off 200 and 1000 Hz), two detectors,
    two reports. Returns the artifacts and the evaluated rows."""
    t0 = time.perf_counter()
    sources = synthesize_sources(400, 1.0, 44100, SEED, root / "sources")
    store = FeatureStore()
    out = {"rows": {}, "files": [], "manifests": {}, "models": {}}
    for train_cut, test_cuts in ((200.0, TEST_CUTOFFS), (1000.0, (200.0, 1000.0))):
        tag = f"synth{train_cut:g}"
        manifest = build_corpus(sources, root / tag, train_cutoffs=(train_cut,),
                                test_cutoffs=test_cuts, split=0.6, seed=SEED, corpus_id=tag)
        model = train_from_manifest(manifest, C=0.4, store=store)
        save_detector(model, root / f"{tag}.det")
        rows = evaluate(model, manifest, scopes=["fused"], cutoffs=[None, *test_cuts], store=store)
        render_report(rows, root / f"{tag}_report.csv")
        out["rows"][train_cut] = {r.cutoff_hz: r for r in rows}
        out["manifests"][train_cut] = manifest
        out["models"][train_cut] = model
        out["files"] += [root / tag / "manifest.csv", root / f"{tag}.det",
                         root / f"{tag}_report.csv"]
    out["elapsed"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def protocol(tmp_path_factory):
    return run_protocol(tmp_path_factory.mktemp("acceptance"))


def test_5_end_to_end(protocol, acceptance):
    rows = protocol["rows"][200.0]
    pooled, at200 = rows[None], rows[200.0]
    ok = (pooled.acc >= 0.95 and pooled.far <= 0.05 and at200.acc >= 0.95 and at200.far <= 0.05
          and protocol["elapsed"] < 300)
    acceptance(5, "end-to-end intra-corpus", ok,
               f"pooled ACC={pooled.acc:.4f} FAR={pooled.far:.4f}; "
               f"200 Hz ACC={at200.acc:.4f} FAR={at200.far:.4f}; "
               f"n_real={at200.n_real} n_fake={at200.n_fake}; run {protocol['elapsed']:.1f}s")
    assert ok


def test_6_cutoff_robustness(protocol, acceptance):
    rows = protocol["rows"][200.0]
    accs = {c: rows[c].acc for c in (400.0, 600.0, 800.0, 1000.0)}
    ok = all(a >= 0.90 for a in accs.values())
    acceptance(6, "cut-off robustness", ok,
               " ".join(f"{c:g}Hz={a:.4f}" for c, a in accs.items()))
    assert ok


def test_7_downward_generalization(protocol, acceptance):
    rows = protocol["rows"][1000.0]
    hi, lo = rows[1000.0].acc, rows[200.0].acc
    ok = hi > lo
    acceptance(7, "train 1000 Hz: ACC(1000) > ACC(200)", ok,
               f"ACC@1000={hi:.4f} ACC@200={lo:.4f}")
    assert ok


def test_8_copy_fast_path(protocol, acceptance, monkeypatch):
    calls = []
    real_decide, real_scores = svm.decide, svm.SvmModel.scores
    monkeypatch.setattr(svm, "decide", lambda *a: calls.append("decide") or real_decide(*a))
    monkeypatch.setattr(svm.SvmModel, "scores",
                        lambda self, X: calls.append("scores") or real_scores(self, X))
    manifest, model = protocol["manifests"][200.0], protocol["models"][200.0]
    reals = manifest.select(split="test", label="real")
    flagged = 0
    for e in reals:
        y = fake_stereo_copy(to_mono(read_wav(manifest.abspath(e))))
        v = detect_with_copy_check(model, y)
        flagged += v.is_fake and v.copy_detected
    ok = flagged == len(reals) and not calls
    acceptance(8, "channel-copy fast path", ok,
               f"{flagged}/{len(reals)} flagged, {len(calls)} SVM calls")
    assert ok


def test_swapped_fakes_still_caught(protocol):
    # not a numbered criterion: a left/right swap of a right-faked clip is a
    # left-faked clip, which the 2nd classifier should catch
    manifest, model = protocol["manifests"][200.0], protocol["models"][200.0]
    fakes = manifest.select(split="test", label="fake", cutoff_hz=200.0, faked_side="right")
    caught = sum(
        detect_with_copy_check(model, read_wav(manifest.abspath(e)).swapped()).is_fake
        for e in fakes
    )
    assert caught / len(fakes) >= 0.95


def test_9_determinism(protocol, acceptance, tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance_rerun")
    try:
        again = run_protocol(root)
        pairs = list(zip(protocol["files"], again["files"]))
        same = [a.read_bytes() == b.read_bytes() for a, b in pairs]
    finally:
        shutil.rmtree(root, ignore_errors=True)
    ok = all(same) and len(same) == 6
    acceptance(9, "determinism", ok,
               f"{sum(same)}/{len(same)} artifacts byte-identical "
               "(2 manifests, 2 models, 2 reports)")
    assert ok
