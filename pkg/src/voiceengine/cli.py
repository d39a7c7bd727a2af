"""Command line entry point: ``voiceengine <command> ...``.

Exit status is 0 on success, 1 on a data or runtime failure and 2 on a
usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio import N_CLASSES, read_wav, synthesize_word_token, write_wav
from .config import PipelineConfig, load_config
from .errors import VoiceEngineError
from .lexicon import Lexicon, text_to_phonemes
from .recognizer import (DEFAULT_VOCABULARY, MANIFEST_NAME, evaluate, load_corpus_dir,
                         read_model, recognize, train_recognizer, write_model)


def _fail(exc, path=None):
    where = f"{path}: " if path else ""
    print(f"error: {where}{type(exc).__name__}: {exc}", file=sys.stderr)


def _pipeline_config(args):
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for flag, key in (("states", "hmm.n_states"), ("iters", "hmm.max_iters"),
                      ("codebook_size", "vq.size"), ("lpc_order", "frontend.lpc_order")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    if args.lpc_order is not None:
        overrides["frontend.cepstrum_order"] = args.lpc_order
    return cfg.with_overrides(overrides)


def cmd_train(args):
    cfg = _pipeline_config(args)
    corpus = load_corpus_dir(args.corpus_dir)
    vocab = args.vocab.split(",") if args.vocab else None
    stats = {}
    r = train_recognizer(corpus, vocab, cfg.frontend, cfg.hmm, cfg.vq, args.seed,
                         cfg.endpoint, stats=stats)
    write_model(args.model_out, r)
    for word, history in stats.items():
        print(f"{word}\t{history[-1]:.6f}")
    return 0


def cmd_recognize(args):
    r = read_model(args.model)
    status = 0
    for path in args.wav:
        try:
            ranking = recognize(r, read_wav(path))
        except (VoiceEngineError, OSError) as exc:
            _fail(exc, path)
            status = 1
            continue
        if ranking.all_impossible:
            print(f"warning: {path}: AllImpossible: every word model scores -inf",
                  file=sys.stderr)
        for word, ll in ranking[:args.top]:
            print(f"{path}\t{word}\t{ll:.6f}")
    return status


def cmd_eval(args):
    r = read_model(args.model)
    test = load_corpus_dir(args.test_dir)
    report = evaluate(r, test, args.snr, args.seed)
    if args.snr is not None:
        print(f"snr: {args.snr:g} dB")
    print(report.format())
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_dict(), indent=1) + "\n",
                                   encoding="utf-8")
    return 0


def cmd_gen_corpus(args):
    out = Path(args.out_dir)
    if out.exists() and any(out.iterdir()) and not args.force:
        print(f"error: {out} exists and is not empty (use --force)", file=sys.stderr)
        return 1
    if not 1 <= args.classes <= N_CLASSES:
        print(f"error: --classes must lie in 1..{N_CLASSES}", file=sys.stderr)
        return 1
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for k in range(args.classes):
        word = DEFAULT_VOCABULARY[k]
        (out / word).mkdir(exist_ok=True)
        for s in range(args.first_speaker, args.first_speaker + args.speakers):
            for a in range(args.attempts):
                attempt_seed = int(np.random.SeedSequence([args.seed, s, a]).generate_state(1)[0])
                clip = synthesize_word_token(k, s, attempt_seed, args.sample_rate)
                rel = f"{word}/spk{s}_{a}.wav"
                write_wav(out / rel, clip)
                lines.append(f"{rel},{word},spk{s},{a}\n")
    (out / MANIFEST_NAME).write_text("".join(lines), encoding="utf-8")
    print(f"wrote {len(lines)} tokens to {out}")
    return 0


def cmd_phonemes(args):
    text = " ".join(args.text)
    if not text.strip():
        args.parser.error("no text given")
    lex = Lexicon.load(args.lexicon) if args.lexicon else Lexicon.default()
    phones = text_to_phonemes(text, lex)
    print(" ".join(phones))
    return 0


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _snr(text):
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("SNR must be a number")
    return value


def build_parser():
    p = argparse.ArgumentParser(prog="voiceengine",
                                description="LPC + VQ + HMM isolated word recognizer")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a recognizer from a corpus directory")
    t.add_argument("corpus_dir")
    t.add_argument("model_out")
    t.add_argument("--config", help="section.key = value settings file")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--vocab", help="comma separated word list (default: words in the corpus)")
    t.add_argument("--states", type=_positive_int)
    t.add_argument("--iters", type=_positive_int)
    t.add_argument("--codebook-size", type=_positive_int)
    t.add_argument("--lpc-order", type=_positive_int)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("recognize", help="recognize WAV files")
    r.add_argument("model")
    r.add_argument("wav", nargs="+")
    r.add_argument("--top", type=_positive_int, default=1)
    r.set_defaults(func=cmd_recognize)

    e = sub.add_parser("eval", help="evaluate on a labelled test corpus")
    e.add_argument("model")
    e.add_argument("test_dir")
    e.add_argument("--snr", type=_snr, help="add white noise at this SNR (dB)")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--json", help="also write the report as JSON here")
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("gen-corpus", help="write a synthetic corpus of word tokens")
    g.add_argument("out_dir")
    g.add_argument("--classes", type=_positive_int, default=N_CLASSES)
    g.add_argument("--speakers", type=_positive_int, default=5)
    g.add_argument("--attempts", type=_positive_int, default=5)
    g.add_argument("--first-speaker", type=int, default=0,
                   help="id of the first speaker; use disjoint ranges for test sets")
    g.add_argument("--sample-rate", type=int, choices=(8000, 16000), default=8000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_gen_corpus)

    ph = sub.add_parser("phonemes", help="convert text to phonemes")
    ph.add_argument("text", nargs="*")
    ph.add_argument("--lexicon", help="lexicon file, word<TAB>PH PH ...")
    ph.set_defaults(func=cmd_phonemes, parser=ph)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (VoiceEngineError, OSError, ValueError) as exc:
        _fail(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
