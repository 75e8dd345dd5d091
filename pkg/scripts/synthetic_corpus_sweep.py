#!/usr/bin/env python3
"""Generate a templated explanation corpus, sweep the MI threshold and print
the concept-count / accuracy curve (report only: richer data than the worked
example, so the greedy stop point actually moves with gamma).

Usage: python scripts/synthetic_corpus_sweep.py [--records 240] [--seed 5]
"""

import argparse
import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np  # noqa: E402

from conceptminer.config import RunConfig  # noqa: E402
from conceptminer.pipeline import sweep_gamma  # noqa: E402

# per-label phrase banks; every phrase passes the extraction rules
LABEL_PHRASES = {
    "strike": ["the batter did not swing", "the ball was in the strike zone",
               "the umpire called a clean strike"],
    "ball": ["the pitch was outside the zone", "the batter watched the pitch",
             "the ball was far from the plate"],
    "foul": ["the ball landed in foul territory", "the batter clipped the pitch",
             "the ball was behind the line"],
    "out": ["the fielder caught the ball", "the runner was out at first",
            "the throw beat the runner"],
}
FILLER = ["the crowd was loud", "the stadium was full", "the inning was long"]


def build_corpus(path: str, n_records: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    labels = sorted(LABEL_PHRASES)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_records):
            label = labels[int(rng.integers(len(labels)))]
            phrases = [LABEL_PHRASES[label][int(rng.integers(3))]]
            if rng.random() < 0.5:
                phrases.append(LABEL_PHRASES[label][int(rng.integers(3))])
            if rng.random() < 0.4:
                phrases.append(FILLER[int(rng.integers(len(FILLER)))])
            rng.shuffle(phrases)
            fh.write(json.dumps({
                "id": i, "label": label, "explanation": ". ".join(phrases) + ".",
            }))
            fh.write("\n")


def run(n_records: int, seed: int, outdir: str) -> None:
    os.makedirs(outdir, exist_ok=True)
    corpus_path = os.path.join(outdir, "corpus.jsonl")
    build_corpus(corpus_path, n_records, seed)
    # retention off so the threshold genuinely trades concepts for MI
    config = RunConfig(
        corpus=corpus_path, out=outdir, min_count=3, embed_dim=64,
        retain_informative=False,
        n_features=64, hidden=32, attn_dim=8, epochs=60, batch_size=16,
        eval_fraction=0.25, seed=seed,
    ).validate()
    path = sweep_gamma(config, [0.3, 0.5, 0.7, 0.9, 1.0], outdir)
    print(open(path).read().strip())


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--records", type=int, default=240)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()
    outdir = args.out or tempfile.mkdtemp(prefix="corpus-sweep-")
    run(args.records, args.seed, outdir)
