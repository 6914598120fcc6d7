"""Run the full analysis on a local DraCor snapshot (a directory of TEI files).

German corpus:

    python scripts/reproduce_corpus.py --corpus-dir gerdracor/tei --out runs/ger

Shakespeare, with history plays counted as tragedies:

    python scripts/reproduce_corpus.py --corpus-dir shakedracor/tei --out runs/shake --history-as-tragedy

Pass --manifest to override genre labels from a play_id,genre CSV.
"""

import argparse
import sys
from pathlib import Path

from dramanet.cli import main

STEPS = [
    ["ingest"],
    ["correlate"],
    ["features"],
    ["test"],
    ["pca"],
    ["classify"],
    ["classify", "--with-size"],
    ["rfe"],
    ["rfe", "--with-size"],
    ["ablate"],
    ["ablate", "--acts", "5"],
]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--corpus-dir", type=Path, required=True)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--manifest", type=Path)
    ap.add_argument("--history-as-tragedy", action="store_true")
    ap.add_argument("--parallelism", default="auto")
    args = ap.parse_args(argv)

    common = ["--corpus-dir", str(args.corpus_dir), "--output-dir", str(args.out), "--parallelism", args.parallelism]
    if args.manifest:
        common += ["--manifest", str(args.manifest)]
    if args.history_as_tragedy:
        common.append("--history-as-tragedy")
    for step in STEPS:
        print(f"\n$ dramanet {' '.join(step)}")
        code = main(step + common)
        if code:
            print(f"step {step[0]} exited with {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
