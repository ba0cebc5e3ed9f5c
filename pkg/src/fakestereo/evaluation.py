"""ACC/FAR evaluation of detectors on the test split of a corpus.

ACC is the fraction of test clips labeled correctly. FAR is the fraction of
fake clips accepted as real. Both are stored as fractions; the text
renderer shows percentages.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .corpus import CorpusManifest
from .detector import DetectorModel
from .features import FrameConfig, MelConfig
from .forgery import FakedSide
from .pipeline import FeatureStore, manifest_rate
from .svm import REAL, SvmModel, sign_label

SCOPES = ("1st", "2nd", "fused")
REPORT_COLUMNS = ["train_corpus", "test_corpus", "cutoff_hz", "scope", "acc", "far",
                  "n_real", "n_fake"]
ALL_CUTOFFS = "all"


@dataclass(frozen=True)
class Confusion:
    real_as_real: int = 0
    real_as_fake: int = 0
    fake_as_real: int = 0
    fake_as_fake: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self):
        return (self.real_as_real, self.real_as_fake, self.fake_as_real, self.fake_as_fake)

    @property
    def n_real(self) -> int:
        return self.real_as_real + self.real_as_fake

    @property
    def n_fake(self) -> int:
        return self.fake_as_real + self.fake_as_fake

    @property
    def acc(self) -> float:
        total = self.n_real + self.n_fake
        return (self.real_as_real + self.fake_as_fake) / total if total else float("nan")

    @property
    def far(self) -> float:
        return self.fake_as_real / self.n_fake if self.n_fake else 0.0


def tally(truth_real: Sequence[bool], predicted_real: Sequence[bool]) -> Confusion:
    t = np.asarray(truth_real, dtype=bool)
    p = np.asarray(predicted_real, dtype=bool)
    return Confusion(
        int(np.sum(t & p)), int(np.sum(t & ~p)), int(np.sum(~t & p)), int(np.sum(~t & ~p))
    )


@dataclass(frozen=True)
class EvalRow:
    train_corpus: str
    test_corpus: str
    cutoff_hz: Optional[float]  # None: all cut-offs pooled
    scope: str
    acc: float
    far: float
    n_real: int
    n_fake: int


def _scope_of(model: SvmModel) -> str:
    return "1st" if FakedSide.parse(model.faked_side) is FakedSide.RIGHT else "2nd"


def evaluate(
    model: Union[DetectorModel, SvmModel],
    manifest: CorpusManifest,
    scopes: Optional[Sequence[str]] = None,
    cutoffs: Optional[Sequence[Optional[float]]] = None,
    train_corpus: Optional[str] = None,
    store: Optional[FeatureStore] = None,
    copy_check: bool = True,
    frame: Optional[FrameConfig] = None,
    mel: Optional[MelConfig] = None,
) -> list[EvalRow]:
    """One row per (cut-off, scope) on the manifest's test split.

    The 1st scope scores real clips and right-faked clips with the 1st
    classifier, the 2nd scope real and left-faked clips with the 2nd, and
    the fused scope all of them with the OR rule. `cutoffs` defaults to
    every cut-off present in the test split; a None entry pools them all.
    """
    store = store if store is not None else FeatureStore()
    if isinstance(model, DetectorModel):
        frame, mel = model.frame, model.mel
        classifiers = {"1st": model.svm_right_faked, "2nd": model.svm_left_faked}
        scopes = list(scopes) if scopes is not None else list(SCOPES)
        train_corpus = train_corpus if train_corpus is not None else model.corpus_id
    else:
        rate = manifest_rate(manifest)
        frame = frame or FrameConfig.for_rate(rate)
        mel = (mel or MelConfig()).resolved(rate)
        classifiers = {_scope_of(model): model}
        scopes = list(scopes) if scopes is not None else list(classifiers)
        train_corpus = train_corpus if train_corpus is not None else model.corpus_id
    for s in scopes:
        if s not in classifiers and not (s == "fused" and len(classifiers) == 2):
            raise ValueError(f"scope {s!r} not available for this model")

    if cutoffs is None:
        cutoffs = manifest.cutoffs("test")
    reals = manifest.select(split="test", label="real")
    fakes = manifest.select(split="test", label="fake")

    rows = []
    for cut in cutoffs:
        for scope in scopes:
            sel = [e for e in fakes if cut is None or e.cutoff_hz == float(cut)]
            if scope == "1st":
                sel = [e for e in sel if e.faked_side == "right"]
            elif scope == "2nd":
                sel = [e for e in sel if e.faked_side == "left"]
            entries = reals + sel
            if not sel or not entries:
                raise ValueError(
                    f"no test clips for cut-off {cut!r}, scope {scope} in {manifest.corpus_id}"
                )
            pairs = [store.get(manifest.abspath(e), frame, mel) for e in entries]
            X = np.stack([f.values for f, _ in pairs])
            if scope == "fused":
                s1 = classifiers["1st"].scores(X)
                s2 = classifiers["2nd"].scores(X)
                pred_real = (sign_label(s1) == REAL) & (sign_label(s2) == REAL)
                if copy_check:
                    pred_real &= ~np.array([copy for _, copy in pairs])
            else:
                pred_real = sign_label(classifiers[scope].scores(X)) == REAL
            conf = tally([e.label == "real" for e in entries], pred_real)
            rows.append(EvalRow(train_corpus, manifest.corpus_id,
                                None if cut is None else float(cut), scope,
                                conf.acc, conf.far, conf.n_real, conf.n_fake))
    return rows


def cross_evaluate(
    models: Mapping[str, DetectorModel],
    manifests: Mapping[str, CorpusManifest],
    scopes: Optional[Sequence[str]] = None,
    cutoffs: Optional[Sequence[Optional[float]]] = None,
    store: Optional[FeatureStore] = None,
    copy_check: bool = True,
) -> list[EvalRow]:
    """Every trained model against every corpus's test split."""
    if not models or not manifests:
        raise ValueError("need at least one model and one manifest")
    store = store if store is not None else FeatureStore()
    rows = []
    for train_id, model in models.items():
        for manifest in manifests.values():
            rows.extend(evaluate(model, manifest, scopes=scopes, cutoffs=cutoffs,
                                 train_corpus=train_id, store=store, copy_check=copy_check))
    return rows


# -- rendering ---------------------------------------------------------------

def fmt_fraction(v: float) -> str:
    return str(Decimal(repr(float(v))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def _fmt_cutoff(c: Optional[float]) -> str:
    return ALL_CUTOFFS if c is None else f"{c:g}"


def render_csv(rows: Sequence[EvalRow]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for r in rows:
        lines.append(",".join([
            r.train_corpus, r.test_corpus, _fmt_cutoff(r.cutoff_hz), r.scope,
            fmt_fraction(r.acc), fmt_fraction(r.far), str(r.n_real), str(r.n_fake),
        ]))
    return "\n".join(lines) + "\n"


def render_text(rows: Sequence[EvalRow]) -> str:
    """Grid per scope: (train corpus, cut-off) rows by test-corpus columns.

    Cells read ACC/FAR in percent.
    """
    out = []
    for scope in SCOPES:
        sub = [r for r in rows if r.scope == scope]
        if not sub:
            continue
        tests = list(dict.fromkeys(r.test_corpus for r in sub))
        keys = list(dict.fromkeys((r.train_corpus, r.cutoff_hz) for r in sub))
        cells = {(r.train_corpus, r.cutoff_hz, r.test_corpus): r for r in sub}
        head = ["train", "cutoff_hz"] + tests
        body = []
        for train, cut in keys:
            line = [train, _fmt_cutoff(cut)]
            for t in tests:
                r = cells.get((train, cut, t))
                line.append("-" if r is None else f"{100 * r.acc:.2f}/{100 * r.far:.2f}")
            body.append(line)
        widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
        out.append(f"scope {scope}: ACC/FAR (%)")
        for line in [head] + body:
            out.append("  ".join(str(x).ljust(w) for x, w in zip(line, widths)).rstrip())
        out.append("")
    return "\n".join(out)


def render_report(rows: Sequence[EvalRow], path, format: str = "csv") -> None:
    if format == "csv":
        text = render_csv(rows)
    elif format in ("text", "text-table"):
        text = render_text(rows)
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_report(path) -> list[EvalRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != REPORT_COLUMNS:
            raise ValueError(f"unexpected report columns {reader.fieldnames!r}")
        return [
            EvalRow(
                rec["train_corpus"], rec["test_corpus"],
                None if rec["cutoff_hz"] == ALL_CUTOFFS else float(rec["cutoff_hz"]),
                rec["scope"], float(rec["acc"]), float(rec["far"]),
                int(rec["n_real"]), int(rec["n_fake"]),
            )
            for rec in reader
        ]
