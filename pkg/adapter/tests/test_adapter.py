import json
import os
import shlex
import subprocess
import sys

import pytest

from nlp_adapter.cli import main, preprocess
from nlp_adapter.validate import validate_embedding_line, validate_parse_payload

REPO = os.path.join(os.path.dirname(__file__), "..", "..")
A1_CORPUS = os.path.abspath(os.path.join(REPO, "data", "a1_corpus.jsonl"))
CORE = f"{shlex.quote(sys.executable)} -m conceptminer.cli"

A1_RAW_CONCEPTS = {
    "the batter did not swing",
    "the ball was in the strike zone",
    "the ball into the stands",
    "it landed in foul territory",
    "the hitter didn't swing",
    "the ball was outside the strike zone",
    "the batter hit the ball",
    "it was caught by the fielder",
}


@pytest.fixture(scope="module")
def a1_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("adapter_a1")
    manifest = preprocess(A1_CORPUS, str(out), core_cli=CORE)
    return out, manifest


def test_outputs_validate_against_schemas(a1_run):
    out, _ = a1_run
    payload = json.load(open(out / "parses.json"))
    validate_parse_payload(payload)
    with open(out / "embeddings.jsonl") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    assert lines
    dims = set()
    for line in lines:
        validate_embedding_line(line)
        dims.add(len(line["vector"]))
    assert dims == {768}


def test_manifest_contents(a1_run):
    out, manifest = a1_run
    assert manifest["records"] == 5
    assert manifest["fragments"] == 8
    assert manifest["embedding_dim"] == 768
    assert manifest["parser"]["active"] == "builtin"
    assert len(manifest["corpus_sha256"]) == 64
    on_disk = json.load(open(out / "manifest.json"))
    assert on_disk == manifest


def test_core_extract_reproduces_a1_concepts(a1_run, tmp_path):
    out, _ = a1_run
    run_dir = tmp_path / "core"
    for stage in ("clean", "extract"):
        cmd = shlex.split(CORE) + [
            stage, "--corpus", A1_CORPUS,
            "--parses", str(out / "parses.json"), "--out", str(run_dir),
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    raw = json.load(open(run_dir / "raw_concepts.json"))
    assert set(raw["concepts"]) == A1_RAW_CONCEPTS


def test_embeddings_cover_every_fragment_once(a1_run):
    out, _ = a1_run
    texts = [json.loads(line)["text"] for line in open(out / "embeddings.jsonl")]
    assert sorted(texts) == sorted(set(texts))
    assert set(texts) == A1_RAW_CONCEPTS


def test_full_core_run_over_adapter_outputs(a1_run, tmp_path):
    out, _ = a1_run
    run_dir = tmp_path / "full"
    cmd = shlex.split(CORE) + [
        "run-all", "--corpus", A1_CORPUS,
        "--parses", str(out / "parses.json"),
        "--embeddings", str(out / "embeddings.jsonl"),
        "--out", str(run_dir),
    ]
    # defaults: min_count=3 prunes this tiny corpus away, so relax via config
    config = tmp_path / "run.cfg"
    config.write_text(
        f"corpus = {A1_CORPUS}\n"
        f"parses = {out / 'parses.json'}\n"
        f"embeddings = {out / 'embeddings.jsonl'}\n"
        "min_count = 1\nlambda = 0.1\nepochs = 3\nbatch_size = 4\n"
        "n_features = 8\nhidden = 8\nattn_dim = 4\n"
    )
    cmd = shlex.split(CORE) + ["run-all", "--config", str(config), "--out", str(run_dir)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    counts = dict(
        line.split(",") for line in
        open(run_dir / "stage_counts.csv").read().splitlines()[1:]
    )
    assert counts["extraction"] == "8"


def test_empty_corpus_gives_empty_interchange(tmp_path):
    corpus = tmp_path / "empty.jsonl"
    corpus.write_text("")
    out = tmp_path / "out"
    manifest = preprocess(str(corpus), str(out), core_cli=CORE)
    assert manifest["records"] == 0 and manifest["fragments"] == 0
    payload = json.load(open(out / "parses.json"))
    assert payload == {"records": []}
    validate_parse_payload(payload)
    assert open(out / "embeddings.jsonl").read() == ""
    assert json.load(open(out / "manifest.json")) == manifest


def test_injected_dimension_mismatch_rejected_by_core(a1_run, tmp_path):
    out, _ = a1_run
    lines = open(out / "embeddings.jsonl").read().splitlines()
    first = json.loads(lines[0])
    first["vector"] = first["vector"][:16]  # wrong dimension
    broken = tmp_path / "broken.jsonl"
    broken.write_text(json.dumps(first) + "\n" + "\n".join(lines[1:]) + "\n")

    run_dir = tmp_path / "core"
    config = tmp_path / "run.cfg"
    config.write_text(
        f"corpus = {A1_CORPUS}\n"
        f"parses = {out / 'parses.json'}\n"
        f"embeddings = {broken}\n"
        "min_count = 1\n"
    )
    base = shlex.split(CORE)
    for stage in ("clean", "extract", "complete"):
        subprocess.run(base + [stage, "--config", str(config), "--out", str(run_dir)],
                       capture_output=True, text=True, check=True)
    proc = subprocess.run(base + ["group", "--config", str(config), "--out", str(run_dir)],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "dimension" in proc.stderr


def test_malformed_corpus_line_rejected(tmp_path, capsys):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text('{"id": 1, "label": "a"}\n')
    assert main(["--corpus", str(corpus), "--out", str(tmp_path / "o")]) == 1
    assert "bad corpus line 1" in capsys.readouterr().err
