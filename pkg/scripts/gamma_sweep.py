#!/usr/bin/env python3
"""Sweep the mutual-information threshold over the worked example and print
the resulting concept-count / accuracy trade-off curve.

Usage: python scripts/gamma_sweep.py [--gammas 0.3,0.5,0.7,0.9,1.0]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conceptminer.config import load_config  # noqa: E402
from conceptminer.pipeline import sweep_gamma  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..")


def run(gammas: list[float], outdir: str) -> None:
    config = load_config(os.path.join(ROOT, "data", "a1_config.cfg"))
    path = sweep_gamma(config, gammas, outdir)
    print(open(path).read().strip())


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--gammas", default="0.3,0.5,0.7,0.9,1.0")
    parser.add_argument("--out", default=os.path.join(ROOT, "runs", "gamma_sweep"))
    args = parser.parse_args()
    run([float(g) for g in args.gammas.split(",") if g], args.out)
