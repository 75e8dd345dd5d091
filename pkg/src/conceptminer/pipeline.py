"""Stage orchestration: clean, extract, complete, group, prune, vectorize,
train, evaluate; plus the gamma sweep.

Every stage reads and writes files inside the run directory so the CLI
subcommands compose, and a manifest records the config hash and a digest of
each artifact. Nothing written here contains timestamps: two runs with the
same config and seed produce byte-identical artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from . import model as mdl
from .config import RunConfig, config_hash
from .corpus import ExplanationCorpus, ExplanationRecord, clean, load_corpus, make_corpus
from .counting import RawConcept, complete
from .errors import ConfigError, StageError
from .extraction import RawConceptOccurrence, extract_raw_concepts
from .grouping import (
    ConceptGroup,
    EmbeddingSource,
    MetaDistanceParams,
    cluster,
    filter_rare,
    singleton_groups,
)
from .parsing import ParseSource
from .pruning import PresenceTable, greedy_prune
from .vectorize import ConceptLexicon, ConceptMatrix, load_matrix, save_matrix, vectorize

STAGE_FILES = {
    "clean": "cleaned.jsonl",
    "extract": "raw_concepts.json",
    "complete": "counts.json",
    "group": "groups.json",
    "prune": "prune.json",
    "vectorize": "matrix.csv",
    "train": "model.json",
    "evaluate": "metrics.csv",
}


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --- individual stages ------------------------------------------------------


def stage_clean(config: RunConfig, out: str) -> ExplanationCorpus:
    corpus = load_corpus(
        config.corpus, frozenset(config.null_labels), merge_duplicate_ids=config.merge_annotators
    )
    cleaned = clean(corpus)
    with open(os.path.join(out, STAGE_FILES["clean"]), "w", encoding="utf-8", newline="\n") as fh:
        for rec in cleaned.records:
            fh.write(json.dumps(
                {"id": rec.id, "label": rec.label, "explanation": rec.explanation},
                ensure_ascii=False, sort_keys=True,
            ))
            fh.write("\n")
    return cleaned


def load_cleaned(config: RunConfig, out: str) -> ExplanationCorpus:
    path = os.path.join(out, STAGE_FILES["clean"])
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                records.append(ExplanationRecord(obj["id"], obj["label"], obj["explanation"]))
    return make_corpus(records, frozenset(config.null_labels))


def stage_extract(config: RunConfig, out: str, corpus: ExplanationCorpus):
    parses = ParseSource.from_file(config.parses) if config.parses else ParseSource.fallback()
    norms, occurrences = extract_raw_concepts(
        corpus, parses, config.max_fragment_tokens, word_level=config.word_level
    )
    _write_json(os.path.join(out, STAGE_FILES["extract"]), {
        "concepts": norms,
        "occurrences": [
            {"record_id": o.record_id, "fragment": o.fragment, "norm": o.norm}
            for o in occurrences
        ],
    })
    return norms, occurrences


def load_extracted(out: str):
    payload = _read_json(os.path.join(out, STAGE_FILES["extract"]))
    occurrences = [
        RawConceptOccurrence(o["record_id"], o["fragment"], o["norm"])
        for o in payload["occurrences"]
    ]
    return payload["concepts"], occurrences


def stage_complete(config: RunConfig, out: str, corpus, norms, occurrences):
    concepts, containment = complete(corpus, norms, occurrences, config.token_boundary)
    _write_json(os.path.join(out, STAGE_FILES["complete"]), {
        "labels": list(corpus.labels),
        "concepts": [
            {
                "index": c.index, "norm": c.norm, "display": c.display,
                "count": c.count, "label_counts": list(c.label_counts),
                "first_pos": list(c.first_pos),
            }
            for c in concepts
        ],
        "total_occurrences": sum(c.count for c in concepts),
    })
    return concepts, containment


def load_completed(config: RunConfig, out: str, corpus):
    payload = _read_json(os.path.join(out, STAGE_FILES["complete"]))
    norms = [c["norm"] for c in payload["concepts"]]
    occurrences = [RawConceptOccurrence(-1, c["display"], c["norm"]) for c in payload["concepts"]]
    return complete(corpus, norms, occurrences, config.token_boundary)


def stage_group(config: RunConfig, out: str, corpus, concepts, containment) -> list[ConceptGroup]:
    if config.skip_grouping:
        groups = singleton_groups(concepts, containment, corpus)
    else:
        source = (
            EmbeddingSource.from_file(config.embeddings)
            if config.embeddings
            else EmbeddingSource.fallback(config.embed_dim)
        )
        params = MetaDistanceParams(config.lam, config.alpha, config.text_metric)
        groups = cluster(
            concepts, source, params, config.linkage, config.cut_threshold, containment, corpus
        )
    groups = filter_rare(groups, config.min_count)
    _write_json(os.path.join(out, STAGE_FILES["group"]), {
        "groups": [
            {
                "representative": g.representative.display,
                "representative_norm": g.representative.norm,
                "members": list(g.member_norms),
                "count": g.group_count,
                "label_counts": list(g.group_label_counts),
                "first_pos": list(g.first_pos),
            }
            for g in groups
        ],
    })
    return groups


def load_groups(out: str, concepts: list[RawConcept], corpus, containment) -> list[ConceptGroup]:
    payload = _read_json(os.path.join(out, STAGE_FILES["group"]))
    by_norm = {c.norm: c for c in concepts}
    groups = []
    for g in payload["groups"]:
        members = tuple(by_norm[n] for n in g["members"])
        rep = by_norm[g["representative_norm"]]
        groups.append(ConceptGroup(
            members, rep, g["count"], tuple(g["label_counts"]), tuple(g["first_pos"]),
        ))
    return groups


def presence_table(corpus, groups, containment, column_order) -> PresenceTable:
    label_ids = {label: i for i, label in enumerate(corpus.labels)}
    rows = np.zeros((len(corpus.records), len(groups)), dtype=np.int8)
    for col, gi in enumerate(column_order):
        member_set = set(groups[gi].member_norms)
        for row, rec in enumerate(corpus.records):
            if containment[rec.id] & member_set:
                rows[row, col] = 1
    labels = np.array([label_ids[r.label] for r in corpus.records])
    return PresenceTable(rows, labels)


def stage_prune(config: RunConfig, out: str, corpus, groups, containment) -> list[int]:
    """Returns the kept group indices in grouping order; writes the MI trace."""
    curve_path = os.path.join(out, "prune_curve.csv")
    if config.skip_pruning:
        kept = list(range(len(groups)))
        _write_json(os.path.join(out, STAGE_FILES["prune"]), {
            "kept_groups": kept, "gamma": 1.0, "skipped": True,
            "mi_full": None, "mi_selected": None, "shortfall": False,
        })
        with open(curve_path, "w", encoding="utf-8", newline="\n") as fh:
            csv.writer(fh, lineterminator="\n").writerow(
                ["step", "concept", "gain", "cumulative_mi", "phase"]
            )
        return kept

    # column priority: frequent groups first, ties by representative norm, so
    # duplicate-column resolution keeps the expected member
    order = sorted(
        range(len(groups)), key=lambda i: (-groups[i].group_count, groups[i].representative.norm)
    )
    table = presence_table(corpus, groups, containment, order)
    result = greedy_prune(table, config.gamma, config.retain_informative)
    kept = sorted(order[c] for c in result.selected)

    with open(curve_path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "concept", "gain", "cumulative_mi", "phase"])
        for step, (col, gain, cum) in enumerate(zip(result.selected, result.gains, result.curve)):
            phase = "greedy" if step < result.greedy_count else "retained"
            writer.writerow([
                step, groups[order[col]].representative.display,
                f"{gain:.10g}", f"{cum:.10g}", phase,
            ])
    _write_json(os.path.join(out, STAGE_FILES["prune"]), {
        "kept_groups": kept,
        "gamma": config.gamma,
        "skipped": False,
        "mi_full": result.mi_full,
        "mi_selected": result.mi_selected,
        "greedy_count": result.greedy_count,
        "shortfall": result.shortfall,
    })
    return kept


def load_pruned(out: str) -> list[int]:
    return list(_read_json(os.path.join(out, STAGE_FILES["prune"]))["kept_groups"])


def stage_vectorize(config: RunConfig, out: str, corpus, groups, kept) -> ConceptMatrix:
    lexicon = ConceptLexicon.from_groups([groups[i] for i in kept])
    matrix = vectorize(corpus, lexicon, config.token_boundary)
    save_matrix(
        matrix, os.path.join(out, STAGE_FILES["vectorize"]), os.path.join(out, "lexicon.json")
    )
    return matrix


def load_vectorized(out: str) -> ConceptMatrix:
    return load_matrix(os.path.join(out, STAGE_FILES["vectorize"]), os.path.join(out, "lexicon.json"))


def record_features(config: RunConfig, corpus: ExplanationCorpus) -> np.ndarray:
    """Per-record feature vectors: loaded from CSV, or a hashed encoding of
    the explanation text when no file is given.

    The hashed surrogate stands in for per-sample content features: it is a
    pure function of the text, so it correlates with the concepts the text
    contains, is stable under record reordering and is identical across runs.
    """
    if config.features:
        by_id = {}
        with open(config.features, encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            width = len(header) - 1
            for rowline in reader:
                if rowline:
                    by_id[int(rowline[0])] = [float(v) for v in rowline[1:]]
        missing = [r.id for r in corpus.records if r.id not in by_id]
        if missing:
            raise ConfigError(f"features file lacks ids {missing}")
        return np.array([by_id[r.id] for r in corpus.records]), width
    from .grouping import embed_fallback
    from .textmatch import normalize

    rows = [embed_fallback(normalize(rec.explanation) or " ", config.n_features)
            for rec in corpus.records]
    return np.asarray(rows), config.n_features


def _split(config: RunConfig, n: int):
    if config.eval_fraction <= 0.0 or int(n * config.eval_fraction) < 1:
        idx = np.arange(n)
        return idx, idx
    rng = np.random.default_rng(config.seed + 17)
    order = rng.permutation(n)
    n_eval = int(n * config.eval_fraction)
    return order[n_eval:], order[:n_eval]


def stage_train(config: RunConfig, out: str, corpus, matrix: ConceptMatrix) -> mdl.BottleneckModel:
    from .errors import DegenerateTaskError

    if len(matrix.lexicon) == 0:
        raise DegenerateTaskError(
            "concept lexicon is empty (every group fell below min_count or was pruned); "
            "nothing to train on"
        )
    if len(corpus.labels) < 2:
        raise DegenerateTaskError("training needs at least two labels")
    X, n_features = record_features(config, corpus)
    label_ids = {label: i for i, label in enumerate(corpus.labels)}
    y = np.array([label_ids[r.label] for r in corpus.records])
    C = matrix.entries.astype(np.float64)
    model_config = mdl.ModelConfig(
        n_features=n_features,
        hidden=config.hidden,
        n_concepts=len(matrix.lexicon),
        attn_dim=config.attn_dim,
        n_labels=len(corpus.labels),
        beta=config.beta,
        seed=config.seed,
    )
    train_idx, _ = _split(config, len(corpus.records))
    result = mdl.train(
        model_config, X[train_idx], y[train_idx], C[train_idx],
        epochs=config.epochs, lr=config.lr, batch_size=config.batch_size,
    )
    mdl.save_checkpoint(result.model, os.path.join(out, STAGE_FILES["train"]))
    return result.model


def stage_evaluate(config: RunConfig, out: str, corpus, matrix, model) -> mdl.Metrics:
    X, _ = record_features(config, corpus)
    label_ids = {label: i for i, label in enumerate(corpus.labels)}
    y = np.array([label_ids[r.label] for r in corpus.records])
    C = matrix.entries.astype(np.float64)
    _, eval_idx = _split(config, len(corpus.records))
    metrics = mdl.evaluate_bottleneck(model, X[eval_idx], y[eval_idx], C[eval_idx])
    with open(os.path.join(out, STAGE_FILES["evaluate"]), "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["accuracy", "macro_f1", "concept_auc", "excluded_concepts"])
        writer.writerow([
            f"{metrics.accuracy:.10g}",
            f"{metrics.f1:.10g}",
            "" if metrics.concept_auc is None else f"{metrics.concept_auc:.10g}",
            len(metrics.excluded_concepts),
        ])
    _write_explanations(config, out, corpus, matrix, model, X)
    return metrics


def _write_explanations(config, out, corpus, matrix, model, X):
    reports = mdl.explain(model, X)
    reps = [e.representative for e in matrix.lexicon.entries]
    with open(os.path.join(out, "explanations.csv"), "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "predicted_label", "present_concepts", "top_concepts", "others"])
        for rec, report in zip(corpus.records, reports):
            label = corpus.labels[report["predicted"]] if corpus.labels else ""
            present = "|".join(reps[k] for k in report["present"])
            top = "|".join(f"{reps[k]}:{score:.4f}" for k, score in report["top_concepts"])
            writer.writerow([rec.id, label, present, top, f"{report['others']:.4f}"])


# --- orchestration ----------------------------------------------------------


def run_all(config: RunConfig, out: str | None = None) -> str:
    out = out or config.out
    os.makedirs(out, exist_ok=True)
    counts: dict[str, int] = {}

    def run_stage(name, fn, *args):
        try:
            return fn(config, out, *args)
        except Exception as exc:  # noqa: BLE001 - reported with stage context
            raise StageError(name, exc) from exc

    corpus = run_stage("clean", stage_clean)
    norms, occurrences = run_stage("extract", stage_extract, corpus)
    counts["extraction"] = len(norms)
    concepts, containment = run_stage("complete", stage_complete, corpus, norms, occurrences)
    counts["completion"] = sum(c.count for c in concepts)
    groups = run_stage("group", stage_group, corpus, concepts, containment)
    counts["grouping"] = len(groups)
    kept = run_stage("prune", stage_prune, corpus, groups, containment)
    counts["pruning"] = len(kept)
    matrix = run_stage("vectorize", stage_vectorize, corpus, groups, kept)
    model = run_stage("train", stage_train, corpus, matrix)
    run_stage("evaluate", stage_evaluate, corpus, matrix, model)

    _write_stage_counts(out, counts)
    write_manifest(config, out)
    return out


def _write_stage_counts(out: str, counts: dict[str, int]) -> None:
    with open(os.path.join(out, "stage_counts.csv"), "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["stage", "count"])
        for stage in ("extraction", "completion", "grouping", "pruning"):
            writer.writerow([stage, counts[stage]])


def write_manifest(config: RunConfig, out: str) -> None:
    digests = {}
    for name in sorted(os.listdir(out)):
        path = os.path.join(out, name)
        if name == "manifest.json" or not os.path.isfile(path):
            continue
        with open(path, "rb") as fh:
            digests[name] = hashlib.sha256(fh.read()).hexdigest()
    _write_json(os.path.join(out, "manifest.json"), {
        "config_hash": config_hash(config),
        "stages": digests,
    })


def sweep_gamma(config: RunConfig, gammas: list[float], out: str | None = None) -> str:
    """One prune+vectorize+train+evaluate per gamma over shared upstream stages."""
    from dataclasses import replace

    out = out or config.out
    os.makedirs(out, exist_ok=True)
    corpus = stage_clean(config, out)
    norms, occurrences = stage_extract(config, out, corpus)
    concepts, containment = stage_complete(config, out, corpus, norms, occurrences)
    groups = stage_group(config, out, corpus, concepts, containment)

    rows = []
    for gamma in gammas:
        sub = os.path.join(out, f"gamma_{gamma:g}")
        os.makedirs(sub, exist_ok=True)
        cfg = replace(config, gamma=gamma).validate()
        kept = stage_prune(cfg, sub, corpus, groups, containment)
        matrix = stage_vectorize(cfg, sub, corpus, groups, kept)
        model = stage_train(cfg, sub, corpus, matrix)
        metrics = stage_evaluate(cfg, sub, corpus, matrix, model)
        rows.append((gamma, len(kept), metrics.accuracy))

    sweep_path = os.path.join(out, "sweep.csv")
    with open(sweep_path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["gamma", "n_concepts", "accuracy"])
        for gamma, k, acc in rows:
            writer.writerow([f"{gamma:g}", k, f"{acc:.10g}"])
    return sweep_path
