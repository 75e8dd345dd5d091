"""Offline preprocessor: parse and embed an explanation corpus into the core
pipeline's interchange files.

The core is consumed only through its command line and file formats: after
writing the parse interchange, a dry run of the core's clean+extract stages
enumerates the fragments that need embeddings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shlex
import subprocess
import sys
import tempfile

from .backends import EncoderBackend, ParserBackend
from .validate import validate_embedding_line, validate_parse_payload

DEFAULT_CORE_CLI = f"{shlex.quote(sys.executable)} -m conceptminer.cli"


class AdapterError(Exception):
    pass


def read_corpus(path: str) -> list[dict]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rec = {
                    "id": int(obj["id"]),
                    "label": str(obj["label"]),
                    "explanation": str(obj["explanation"]),
                }
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise AdapterError(f"{path}: bad corpus line {lineno}: {exc}") from exc
            if rec["id"] in seen:
                raise AdapterError(f"{path}: duplicate id {rec['id']} on line {lineno}")
            seen.add(rec["id"])
            records.append(rec)
    return records


def write_parses(records: list[dict], parser: ParserBackend, path: str) -> dict:
    payload = {
        "records": [
            {"id": rec["id"], "sentences": parser.analyze(rec["explanation"])}
            for rec in records
        ]
    }
    validate_parse_payload(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def core_fragments(core_cli: str, corpus_path: str, parses_path: str) -> list[str]:
    """Dry-run the core's clean and extract stages to list fragment norms."""
    base = shlex.split(core_cli)
    with tempfile.TemporaryDirectory(prefix="nlp-adapter-") as tmp:
        for stage in ("clean", "extract"):
            cmd = base + [
                stage, "--corpus", os.path.abspath(corpus_path),
                "--parses", os.path.abspath(parses_path), "--out", tmp,
            ]
            proc = subprocess.run(cmd, capture_output=True, text=True)
            if proc.returncode != 0:
                raise AdapterError(
                    f"core dry run failed at {stage}: {proc.stderr.strip() or proc.stdout.strip()}"
                )
        with open(os.path.join(tmp, "raw_concepts.json"), encoding="utf-8") as fh:
            return json.load(fh)["concepts"]


def write_embeddings(norms: list[str], encoder: EncoderBackend, path: str) -> None:
    vectors = encoder.encode(norms) if norms else []
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for norm, vector in zip(norms, vectors):
            line = {"text": norm, "vector": vector}
            validate_embedding_line(line)
            fh.write(json.dumps(line, ensure_ascii=False))
            fh.write("\n")


def preprocess(corpus_path: str, out_dir: str, parser_name: str = "builtin",
               encoder_name: str = "builtin", core_cli: str = DEFAULT_CORE_CLI) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    records = read_corpus(corpus_path)
    parser = ParserBackend(parser_name)
    encoder = EncoderBackend(encoder_name)

    parses_path = os.path.join(out_dir, "parses.json")
    embeddings_path = os.path.join(out_dir, "embeddings.jsonl")
    write_parses(records, parser, parses_path)

    norms = core_fragments(core_cli, corpus_path, parses_path) if records else []
    write_embeddings(norms, encoder, embeddings_path)

    with open(corpus_path, "rb") as fh:
        corpus_digest = hashlib.sha256(fh.read()).hexdigest()
    manifest = {
        "parser": {"requested": parser.requested, "active": parser.active},
        "encoder": {"requested": encoder.requested, "active": encoder.active},
        "embedding_dim": encoder.dim,
        "fragments": len(norms),
        "records": len(records),
        "corpus_sha256": corpus_digest,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlp-adapter",
        description="Parse and embed an explanation corpus into the concept "
        "pipeline's interchange files.",
    )
    parser.add_argument("--corpus", required=True, help="corpus JSONL path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--parser", default="builtin",
                        help="spaCy model name, or 'builtin' for the rule analyzer")
    parser.add_argument("--encoder", default="builtin",
                        help="sentence-transformers model name, or 'builtin' for hashed vectors")
    parser.add_argument("--core-cli", default=DEFAULT_CORE_CLI,
                        help="command used for the core fragment dry run")
    args = parser.parse_args(argv)
    try:
        manifest = preprocess(args.corpus, args.out, args.parser, args.encoder, args.core_cli)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
