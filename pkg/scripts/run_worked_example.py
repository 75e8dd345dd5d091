#!/usr/bin/env python3
"""Run the bundled worked example end-to-end and print every stage artifact.

Usage: python scripts/run_worked_example.py [outdir]
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from conceptminer.cli import main  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..")


def run(outdir: str) -> None:
    config = os.path.join(ROOT, "data", "a1_config.cfg")
    code = main(["run-all", "--config", config, "--out", outdir])
    if code != 0:
        raise SystemExit(code)

    print("\n== stage counts ==")
    print(open(os.path.join(outdir, "stage_counts.csv")).read().strip())

    print("\n== concept lexicon ==")
    lexicon = json.load(open(os.path.join(outdir, "lexicon.json")))
    for entry in lexicon["concepts"]:
        members = ", ".join(entry["members"])
        print(f"  c{entry['k']}: {entry['representative']!r}  (count {entry['count']}; members: {members})")

    print("\n== concept matrix ==")
    print(open(os.path.join(outdir, "matrix.csv")).read().strip())

    print("\n== mutual-information trace ==")
    print(open(os.path.join(outdir, "prune_curve.csv")).read().strip())

    print("\n== metrics ==")
    print(open(os.path.join(outdir, "metrics.csv")).read().strip())


if __name__ == "__main__":
    run(sys.argv[1] if len(sys.argv) > 1 else os.path.join(ROOT, "runs", "worked_example"))
