"""Command-line front end.

Exit codes: 0 ok, 1 I/O or parse failure, 2 invalid arguments, 3 a clip was
judged fake (detect only), 4 SVM training did not converge.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .audio_io import MONO_POLICIES, MonoClip, StereoClip, WavError, read_wav, to_mono, write_wav
from .corpus import (
    DEFAULT_SEED,
    DEFAULT_SPLIT,
    DEFAULT_TEST_CUTOFFS,
    DEFAULT_TRAIN_CUTOFFS,
    ManifestError,
    build_corpus,
    load_manifest,
    synthesize_sources,
)
from .detector import detect_with_copy_check, load_detector, save_detector
from .evaluation import cross_evaluate, render_report
from .features import ClipFeature, FrameConfig, MelConfig, dump_feature_stats
from .forgery import FakedSide, FilterSpec, fake_stereo_copy, fake_stereo_haas
from .pipeline import FeatureStore, features_for, manifest_rate, train_from_manifest
from .svm import DEFAULT_C, ConvergenceError, ModelFormatError

log = logging.getLogger("fakestereo")

EXIT_OK, EXIT_IO, EXIT_ARGS, EXIT_FAKE, EXIT_NOCONV = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _cutoff_list(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty cut-off list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="fakestereo", description="Fake stereo forgery and detection.",
                                formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    p.add_argument("--config", type=Path, default=None,
                   help="flat key=value file overriding subcommand defaults")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("forge", help="make a fake stereo WAV from a mono (or stereo) WAV",
                       formatter_class=fmt)
    f.add_argument("input", type=Path)
    f.add_argument("output", type=Path)
    f.add_argument("--cutoff", type=float, default=200.0, help="high-pass cut-off in Hz")
    f.add_argument("--side", choices=["left", "right"], default="right", help="channel to fake")
    f.add_argument("--method", choices=["haas", "copy"], default="haas", help="forgery method")
    f.add_argument("--mono-policy", choices=MONO_POLICIES, default="left-channel",
                   help="how a stereo input is reduced to mono")

    s = sub.add_parser("synth", help="write synthetic stereo source clips", formatter_class=fmt)
    s.add_argument("out_dir", type=Path)
    s.add_argument("--n-clips", type=int, default=400, help="number of source clips")
    s.add_argument("--duration", type=float, default=1.0, help="seconds per clip")
    s.add_argument("--rate", type=int, default=44100, help="sample rate in Hz")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed")

    c = sub.add_parser("corpus", help="segment sources and forge a labeled corpus",
                       formatter_class=fmt)
    c.add_argument("sources", nargs="+", type=Path, help="stereo WAV files or directories")
    c.add_argument("--out", type=Path, required=True, help="corpus directory")
    c.add_argument("--train-cutoffs", type=_cutoff_list, default=list(DEFAULT_TRAIN_CUTOFFS),
                   help="comma-separated cut-offs (Hz) for train fakes")
    c.add_argument("--test-cutoffs", type=_cutoff_list, default=list(DEFAULT_TEST_CUTOFFS),
                   help="comma-separated cut-offs (Hz) for test fakes")
    c.add_argument("--split", type=float, default=DEFAULT_SPLIT, help="train fraction")
    c.add_argument("--mono-policy", choices=MONO_POLICIES, default="left-channel",
                   help="which signal seeds the fakes")
    c.add_argument("--segment", type=float, default=1.0, help="segment length in seconds")
    c.add_argument("--corpus-id", default=None, help="defaults to the output directory name")
    c.add_argument("--include-copy", action="store_true", help="also emit channel-copy fakes")
    c.add_argument("--seed", type=int, default=DEFAULT_SEED, help="split permutation seed")

    t = sub.add_parser("train", help="train the two-classifier detector", formatter_class=fmt)
    t.add_argument("--manifest", type=Path, required=True, help="corpus manifest.csv")
    t.add_argument("--C", type=float, default=DEFAULT_C, dest="C", help="SVM penalty")
    t.add_argument("--out", type=Path, required=True, help="detector model file")

    d = sub.add_parser("detect", help="classify stereo WAV files", formatter_class=fmt)
    d.add_argument("clips", nargs="+", type=Path, help="stereo WAV files")
    d.add_argument("--model", type=Path, required=True, help="detector model file")
    d.add_argument("--no-copy-check", action="store_true",
                   help="always run the SVMs, even on identical channels")

    e = sub.add_parser("eval", help="ACC/FAR over every model x corpus pair", formatter_class=fmt)
    e.add_argument("--models", nargs="+", type=Path, required=True, help="detector model files")
    e.add_argument("--manifests", nargs="+", type=Path, required=True,
                   help="corpus manifests to test on")
    e.add_argument("--cutoffs", type=_cutoff_list, default=None,
                   help="test cut-offs to report (default: all present)")
    e.add_argument("--pooled", action="store_true", help="add a row pooling all cut-offs")
    e.add_argument("--out", type=Path, default=Path("report.csv"), help="CSV report path")
    e.add_argument("--text", type=Path, default=None, help="also write a text table here")
    e.add_argument("--no-copy-check", action="store_true",
                   help="score channel-copy clips with the SVMs too")

    st = sub.add_parser("stats", help="per-component feature distributions as CSV",
                        formatter_class=fmt)
    st.add_argument("--manifest", type=Path, required=True, help="corpus manifest.csv")
    st.add_argument("--out", type=Path, required=True, help="statistics CSV path")
    st.add_argument("--split", choices=["train", "test", "all"], default="all",
                    help="which split to summarize")
    st.add_argument("--by-cutoff", action="store_true",
                    help="label fakes by cut-off (fake_200, ...) instead of plain 'fake'")
    return p


def _read_config(path: Path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, argv, args) -> argparse.Namespace:
    overlay = _read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions if a.dest != "help"}
    defaults = {}
    for key, text in overlay.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if action.nargs == 0:
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            conv = action.type or str
            defaults[key] = [conv(tok) for tok in text.split()]
        else:
            conv = action.type or str
            try:
                defaults[key] = conv(text)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key}: {exc}")
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"config key {key}: {text!r} not in {list(action.choices)}")
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _expand_sources(paths) -> list[Path]:
    out = []
    for p in paths:
        if p.is_dir():
            out.extend(sorted(p.glob("*.wav")))
        else:
            out.append(p)
    return out


def cmd_forge(args) -> int:
    clip = read_wav(args.input)
    if isinstance(clip, StereoClip):
        clip = to_mono(clip, args.mono_policy)
    if args.method == "copy":
        fake = fake_stereo_copy(clip)
        print(f"method=copy input={args.input} output={args.output} rate={clip.sample_rate_hz}")
    else:
        spec = FilterSpec.for_rate(args.cutoff, clip.sample_rate_hz)
        fake = fake_stereo_haas(clip, spec, FakedSide.parse(args.side))
        print(f"method=haas side={args.side} cutoff_hz={args.cutoff:g} alpha={spec.alpha:.6f} "
              f"input={args.input} output={args.output} rate={clip.sample_rate_hz}")
    write_wav(fake, args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    paths = synthesize_sources(args.n_clips, args.duration, args.rate, args.seed, args.out_dir)
    print(f"wrote {len(paths)} clips to {args.out_dir}")
    return EXIT_OK


def cmd_corpus(args) -> int:
    sources = _expand_sources(args.sources)
    manifest = build_corpus(
        sources, args.out, train_cutoffs=args.train_cutoffs, test_cutoffs=args.test_cutoffs,
        split=args.split, mono_policy=args.mono_policy, seed=args.seed,
        corpus_id=args.corpus_id, segment_s=args.segment, include_copy=args.include_copy,
    )
    n_train = len(manifest.select(split="train"))
    print(f"corpus {manifest.corpus_id}: {len(manifest.entries)} clips "
          f"({n_train} train, {len(manifest.entries) - n_train} test) -> {args.out / 'manifest.csv'}")
    return EXIT_OK


def cmd_train(args) -> int:
    manifest = load_manifest(args.manifest)
    model = train_from_manifest(manifest, C=args.C)
    save_detector(model, args.out)
    print(f"trained detector for corpus {model.corpus_id} (C={args.C:g}) -> {args.out}")
    return EXIT_OK


def _fmt_score(s) -> str:
    return "nan" if s is None else f"{s:.6f}"


def cmd_detect(args) -> int:
    model = load_detector(args.model)
    any_fake = False
    for path in args.clips:
        clip = read_wav(path)
        if isinstance(clip, MonoClip):
            raise ValueError(f"{path}: mono input cannot be judged as stereo")
        v = detect_with_copy_check(model, clip, copy_check=not args.no_copy_check)
        any_fake |= v.is_fake
        print(f"{path}\t{v.label}\t{_fmt_score(v.score_1st)}\t{_fmt_score(v.score_2nd)}")
    return EXIT_FAKE if any_fake else EXIT_OK


def cmd_eval(args) -> int:
    models = {}
    for p in args.models:
        m = load_detector(p)
        key = m.corpus_id or p.stem
        if key in models:
            raise ValueError(f"two models claim corpus {key!r}")
        models[key] = m
    manifests = {}
    for p in args.manifests:
        m = load_manifest(p)
        manifests[m.corpus_id] = m
    cutoffs = args.cutoffs
    if args.pooled:
        base = cutoffs if cutoffs is not None else sorted(
            {c for m in manifests.values() for c in m.cutoffs("test")})
        cutoffs = list(base) + [None]
    rows = cross_evaluate(models, manifests, cutoffs=cutoffs, store=FeatureStore(),
                          copy_check=not args.no_copy_check)
    render_report(rows, args.out, "csv")
    if args.text is not None:
        render_report(rows, args.text, "text")
    print(f"{len(rows)} report rows -> {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    manifest = load_manifest(args.manifest)
    rate = manifest_rate(manifest)
    entries = manifest.entries if args.split == "all" else manifest.select(split=args.split)
    feats = features_for(manifest, entries, FrameConfig.for_rate(rate), MelConfig().resolved(rate))
    if args.by_cutoff:
        feats = [
            ClipFeature(f.values, label=("real" if e.label == "real" else
                                         f"fake_{e.cutoff_hz:g}" if e.cutoff_hz else "fake_copy"),
                        provenance=f.provenance)
            for f, e in zip(feats, entries)
        ]
    dump_feature_stats(feats, args.out)
    print(f"summarized {len(feats)} clips -> {args.out}")
    return EXIT_OK


COMMANDS = {
    "forge": cmd_forge, "synth": cmd_synth, "corpus": cmd_corpus, "train": cmd_train,
    "detect": cmd_detect, "eval": cmd_eval, "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.config is not None:
            try:
                args = _apply_config(parser, argv, args)
            except OSError as exc:
                log.error("cannot read config: %s", exc)
                return EXIT_IO
        if hasattr(args, "seed"):
            log.info("fakestereo %s %s seed=%d", __version__, args.command, args.seed)
        else:
            log.info("fakestereo %s %s", __version__, args.command)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_ARGS
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NOCONV
    except (OSError, WavError, ManifestError, ModelFormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
