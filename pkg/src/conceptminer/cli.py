"""Command-line interface: one subcommand per pipeline stage plus run-all and
the gamma sweep."""

from __future__ import annotations

import argparse
import os
import sys

from . import pipeline
from .config import RunConfig, apply_overrides, load_config
from .errors import ConceptMinerError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="path to a key=value config file")
    p.add_argument("--corpus", help="corpus JSONL path (overrides config)")
    p.add_argument("--parses", help="parse interchange JSON path")
    p.add_argument("--embeddings", help="embedding interchange JSONL path")
    p.add_argument("--out", help="run directory")
    p.add_argument("--gamma", type=float, help="MI threshold fraction")
    p.add_argument("--seed", type=int, help="training / feature seed")
    p.add_argument("--word-level", action="store_true", default=None,
                   help="ablation: word tokens as concepts, extraction rules bypassed")
    p.add_argument("--skip-grouping", action="store_true", default=None,
                   help="ablation: every raw concept is its own group")
    p.add_argument("--skip-pruning", action="store_true", default=None,
                   help="ablation: keep all concept groups")


def _config_from_args(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return apply_overrides(
        config,
        corpus=args.corpus,
        parses=args.parses,
        embeddings=args.embeddings,
        out=args.out,
        gamma=args.gamma,
        seed=args.seed,
        word_level=args.word_level,
        skip_grouping=args.skip_grouping,
        skip_pruning=args.skip_pruning,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptminer",
        description="Discover concepts from a labeled explanation corpus and train "
        "concept-bottleneck classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("clean", "drop null-labeled records"),
        ("extract", "extract raw concepts from constituents"),
        ("complete", "corpus-wide substring counting"),
        ("group", "cluster near-duplicate concepts"),
        ("prune", "greedy MI selection of concepts"),
        ("vectorize", "emit the lexicon and binary concept matrix"),
        ("train", "train the bottleneck model"),
        ("evaluate", "metrics and per-sample explanation reports"),
        ("run-all", "run every stage in order"),
        ("sweep", "run prune..evaluate per gamma"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--gammas", required=True,
                           help="comma-separated gamma values, e.g. 0.5,0.9,1.0")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        out = config.out
        os.makedirs(out, exist_ok=True)
        _dispatch(args, config, out)
    except ConceptMinerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _dispatch(args, config: RunConfig, out: str) -> None:
    command = args.command
    if command == "run-all":
        pipeline.run_all(config, out)
        print(out)
        return
    if command == "sweep":
        gammas = [float(g) for g in args.gammas.split(",") if g]
        path = pipeline.sweep_gamma(config, gammas, out)
        print(path)
        return

    if command == "clean":
        corpus = pipeline.stage_clean(config, out)
        print(f"{len(corpus)} records, labels: {', '.join(corpus.labels)}")
        return
    corpus = pipeline.load_cleaned(config, out)
    if command == "extract":
        norms, _ = pipeline.stage_extract(config, out, corpus)
        print(f"{len(norms)} raw concepts")
        return
    norms, occurrences = pipeline.load_extracted(out)
    if command == "complete":
        concepts, _ = pipeline.stage_complete(config, out, corpus, norms, occurrences)
        print(f"{sum(c.count for c in concepts)} containment occurrences")
        return
    concepts, containment = pipeline.load_completed(config, out, corpus)
    if command == "group":
        groups = pipeline.stage_group(config, out, corpus, concepts, containment)
        print(f"{len(groups)} concept groups")
        return
    groups = pipeline.load_groups(out, concepts, corpus, containment)
    if command == "prune":
        kept = pipeline.stage_prune(config, out, corpus, groups, containment)
        print(f"{len(kept)} concepts kept")
        return
    if command == "vectorize":
        kept = pipeline.load_pruned(out)
        matrix = pipeline.stage_vectorize(config, out, corpus, groups, kept)
        print(f"{matrix.entries.shape[0]} x {matrix.entries.shape[1]} matrix")
        return
    matrix = pipeline.load_vectorized(out)
    if command == "train":
        pipeline.stage_train(config, out, corpus, matrix)
        print(os.path.join(out, pipeline.STAGE_FILES["train"]))
        return
    if command == "evaluate":
        from .model import load_checkpoint

        model = load_checkpoint(os.path.join(out, pipeline.STAGE_FILES["train"]))
        metrics = pipeline.stage_evaluate(config, out, corpus, matrix, model)
        auc = "n/a" if metrics.concept_auc is None else f"{metrics.concept_auc:.4f}"
        print(f"accuracy={metrics.accuracy:.4f} macro_f1={metrics.f1:.4f} concept_auc={auc}")
        return
    raise AssertionError(f"unhandled command {command}")


if __name__ == "__main__":
    sys.exit(main())
