"""Schema validation for the emitted interchange files."""

from __future__ import annotations

import json
import os
from functools import lru_cache

import jsonschema

_SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "schemas")


@lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    with open(os.path.join(_SCHEMA_DIR, name), encoding="utf-8") as fh:
        return json.load(fh)


def validate_parse_payload(payload: dict) -> None:
    jsonschema.validate(payload, _schema("parse_interchange.schema.json"))
    for record in payload["records"]:
        for sentence in record["sentences"]:
            _check_spans(sentence["root"], len(sentence["tokens"]), record["id"])


def _check_spans(node: dict, n_tokens: int, record_id: int) -> None:
    start, end = node["span"]
    if not (0 <= start < end <= n_tokens):
        raise jsonschema.ValidationError(
            f"record {record_id}: span [{start},{end}) outside 0..{n_tokens}"
        )
    prev_end = start
    for child in node["children"]:
        c_start, c_end = child["span"]
        if c_start < prev_end or c_end > end:
            raise jsonschema.ValidationError(
                f"record {record_id}: child span [{c_start},{c_end}) escapes parent [{start},{end})"
            )
        prev_end = c_end
        _check_spans(child, n_tokens, record_id)


def validate_embedding_line(line: dict) -> None:
    jsonschema.validate(line, _schema("embedding_interchange.schema.json"))
