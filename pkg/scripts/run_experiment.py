#!/usr/bin/env python3
"""Desk-scale isolated word experiment on the synthetic corpus.

Generates a training set (speakers 0-4) and a speaker-disjoint test set
(speakers 5-9), trains a recognizer, then evaluates it clean and at a range
of signal-to-noise ratios. Everything goes through the command line tool so
the run matches what a user would type.

    python3 scripts/run_experiment.py --out runs/demo
"""
import argparse
import json
import time
from pathlib import Path

from voiceengine.cli import main as cli


def run(argv):
    code = cli([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"command failed ({code}): voiceengine {' '.join(map(str, argv))}")


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("runs/experiment"))
    p.add_argument("--seed", type=int, default=0, help="training corpus and model seed")
    p.add_argument("--test-seed", type=int, default=1)
    p.add_argument("--snr", type=float, nargs="*", default=[30, 20, 15, 10, 5, 0])
    p.add_argument("--noise-seed", type=int, default=0)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()

    run(["gen-corpus", out / "train", "--seed", args.seed, "--speakers", 5, "--attempts", 5, "--force"])
    run(["gen-corpus", out / "test", "--seed", args.test_seed, "--first-speaker", 5,
         "--speakers", 5, "--attempts", 4, "--force"])
    run(["train", out / "train", out / "model.json", "--seed", args.seed])

    results = {}
    for snr in [None, *args.snr]:
        tag = "clean" if snr is None else f"snr{snr:g}"
        cmd = ["eval", out / "model.json", out / "test", "--json", out / f"{tag}.json",
               "--seed", args.noise_seed]
        if snr is not None:
            cmd += ["--snr", snr]
        run(cmd)
        results[tag] = json.loads((out / f"{tag}.json").read_text())["accuracy"]

    elapsed = time.perf_counter() - start
    summary = {"accuracy": results, "seconds": round(elapsed, 1)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print("\ncondition  accuracy")
    for tag, acc in results.items():
        print(f"{tag:<10} {acc:.3f}")
    print(f"total time {elapsed:.1f}s, outputs in {out}")


if __name__ == "__main__":
    main()
