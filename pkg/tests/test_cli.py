import json
import os

import pytest

from conceptminer.cli import main
from conceptminer.config import RunConfig, config_hash, load_config
from conceptminer.errors import ConfigError


def _golden_config(tmp_path, a1_corpus_path, **extra):
    lines = {
        "corpus": a1_corpus_path,
        "embeddings": os.path.join(os.path.dirname(a1_corpus_path), "a1_embeddings.jsonl"),
        "lambda": 0.1,
        "min_count": 1,
        "gamma": 0.9,
        "n_features": 8,
        "hidden": 8,
        "attn_dim": 4,
        "epochs": 5,
        "batch_size": 4,
        "lr": 0.01,
        "seed": 0,
    }
    lines.update(extra)
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in lines.items()))
    return str(path)


def _read_counts(out):
    rows = {}
    with open(os.path.join(out, "stage_counts.csv")) as fh:
        next(fh)
        for line in fh:
            stage, count = line.strip().split(",")
            rows[stage] = int(count)
    return rows


def test_run_all_golden_stage_counts(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "run")
    assert main(["run-all", "--config", config, "--out", out]) == 0
    assert _read_counts(out) == {"extraction": 8, "completion": 9, "grouping": 7, "pruning": 6}


def test_run_all_deterministic_manifest(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert main(["run-all", "--config", config, "--out", out1]) == 0
    assert main(["run-all", "--config", config, "--out", out2]) == 0
    m1 = json.load(open(os.path.join(out1, "manifest.json")))
    m2 = json.load(open(os.path.join(out2, "manifest.json")))
    assert m1 == m2
    assert m1["stages"]


def test_stage_subcommands_compose(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "staged")
    for command in ("clean", "extract", "complete", "group", "prune", "vectorize",
                    "train", "evaluate"):
        assert main([command, "--config", config, "--out", out]) == 0, command
    matrix = open(os.path.join(out, "matrix.csv")).read().splitlines()
    assert matrix[0] == "id,c0,c1,c2,c3,c4,c5"
    assert matrix[1:] == ["1,1,0,1,0,0,0", "2,0,1,0,1,0,0", "3,1,0,0,0,1,0", "5,0,1,0,0,0,1"]


def test_word_level_ablation_changes_extraction_only(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "wl")
    # word-level fragments have no fixture embeddings: drop to the hash fallback
    config2 = _golden_config(tmp_path, a1_corpus_path, embeddings="", embed_dim=32)
    assert main(["run-all", "--config", config2, "--out", out, "--word-level"]) == 0
    counts = _read_counts(out)
    raw = json.load(open(os.path.join(out, "raw_concepts.json")))
    assert counts["extraction"] == len(raw["concepts"]) > 8
    assert counts["extraction"] == len({c for c in raw["concepts"]})


def test_skip_grouping_ablation(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "sg")
    assert main(["run-all", "--config", config, "--out", out, "--skip-grouping"]) == 0
    counts = _read_counts(out)
    assert counts["grouping"] == counts["extraction"] == 8


def test_skip_pruning_ablation(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "sp")
    assert main(["run-all", "--config", config, "--out", out, "--skip-pruning"]) == 0
    counts = _read_counts(out)
    assert counts["pruning"] == counts["grouping"] == 7


def test_both_skips_matrix_over_all_raw_concepts(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "sgp")
    assert main(["run-all", "--config", config, "--out", out,
                 "--skip-grouping", "--skip-pruning"]) == 0
    counts = _read_counts(out)
    assert counts["grouping"] == counts["pruning"] == 8
    lexicon = json.load(open(os.path.join(out, "lexicon.json")))
    assert len(lexicon["concepts"]) == 8


def test_sweep_gamma_monotone_k(tmp_path, a1_corpus_path):
    config = _golden_config(tmp_path, a1_corpus_path)
    out = str(tmp_path / "sweep")
    assert main(["sweep", "--config", config, "--out", out, "--gammas", "0.3,0.6,0.9,1.0"]) == 0
    rows = open(os.path.join(out, "sweep.csv")).read().splitlines()[1:]
    ks = [int(r.split(",")[1]) for r in rows]
    assert ks == sorted(ks)
    assert len(rows) == 4
    # gamma=1 keeps every concept group carrying label information; only the
    # duplicate presence column stays out
    assert ks[-1] == 6


def test_overaggressive_filter_fails_clearly(tmp_path, a1_corpus_path, capsys):
    config = _golden_config(tmp_path, a1_corpus_path, min_count=10)
    out = str(tmp_path / "empty")
    assert main(["run-all", "--config", config, "--out", out]) == 1
    assert "lexicon is empty" in capsys.readouterr().err


def test_stage_error_reports_stage(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("corpus = /nonexistent/corpus.jsonl\n")
    out = str(tmp_path / "err")
    assert main(["run-all", "--config", str(config), "--out", out]) == 1
    captured = capsys.readouterr()
    assert "clean" in captured.err


def test_config_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("corpus = x\nnot_a_key = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(path)


def test_config_domain_validation(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("corpus = x\ngamma = 1.5\n")
    with pytest.raises(ConfigError, match="gamma"):
        load_config(path)


def test_config_hash_ignores_nothing(tmp_path):
    a = RunConfig(corpus="x", gamma=0.9)
    b = RunConfig(corpus="x", gamma=0.8)
    assert config_hash(a) != config_hash(b)
    assert config_hash(a) == config_hash(RunConfig(corpus="x", gamma=0.9))
