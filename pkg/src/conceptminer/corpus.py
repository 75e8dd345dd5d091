"""Loading, merging and cleaning of labeled explanation corpora.

A corpus is a JSON Lines file with exact fields ``id`` (integer), ``label``
(string) and ``explanation`` (string). Records whose label is one of the
configured null labels mark unusable samples and are dropped by :func:`clean`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import CorpusFormatError, ValidationError

DEFAULT_NULL_LABELS = frozenset({"none"})


@dataclass(frozen=True)
class ExplanationRecord:
    id: int
    label: str
    explanation: str


@dataclass(frozen=True)
class ExplanationCorpus:
    records: tuple[ExplanationRecord, ...]
    labels: tuple[str, ...]
    null_labels: frozenset[str] = field(default=DEFAULT_NULL_LABELS)

    def __len__(self) -> int:
        return len(self.records)


def _infer_labels(records, null_labels) -> tuple[str, ...]:
    return tuple(sorted({r.label for r in records if r.label not in null_labels}))


def make_corpus(records, null_labels=DEFAULT_NULL_LABELS) -> ExplanationCorpus:
    """Build a corpus from records, inferring the label set."""
    records = tuple(records)
    seen = set()
    for r in records:
        if r.id in seen:
            raise ValidationError(f"duplicate record id {r.id}")
        seen.add(r.id)
    return ExplanationCorpus(records, _infer_labels(records, null_labels), frozenset(null_labels))


def load_corpus(path, null_labels=DEFAULT_NULL_LABELS, merge_duplicate_ids: bool = False) -> ExplanationCorpus:
    """Load a JSONL corpus, preserving file order.

    With ``merge_duplicate_ids`` records sharing an id are treated as
    multi-annotator explanations and concatenated via :func:`merge_annotators`;
    otherwise a duplicate id is a validation error.
    """
    records: list[ExplanationRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: malformed JSON on line {lineno}: {exc}") from exc
            try:
                rec = ExplanationRecord(int(obj["id"]), str(obj["label"]), str(obj["explanation"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(
                    f"{path}: line {lineno} must have integer 'id', string 'label' and 'explanation'"
                ) from exc
            records.append(rec)
    if not records:
        raise CorpusFormatError(f"{path}: empty corpus file")
    if merge_duplicate_ids:
        by_id: dict[int, list[ExplanationRecord]] = {}
        order: list[int] = []
        for r in records:
            if r.id not in by_id:
                order.append(r.id)
            by_id.setdefault(r.id, []).append(r)
        records = [merge_annotators(by_id[i]) for i in order]
    return make_corpus(records, null_labels)


def merge_annotators(records: list[ExplanationRecord]) -> ExplanationRecord:
    """Concatenate multi-annotator explanations for one sample.

    All records must share id and label; explanations are joined with a single
    space in input order.
    """
    if not records:
        raise ValidationError("cannot merge an empty record list")
    first = records[0]
    for r in records[1:]:
        if r.id != first.id:
            raise ValidationError(f"cannot merge records with different ids {first.id} and {r.id}")
        if r.label != first.label:
            raise ValidationError(
                f"conflicting labels for id {first.id}: {first.label!r} vs {r.label!r}"
            )
    if len(records) == 1:
        return first
    text = " ".join(r.explanation for r in records)
    return ExplanationRecord(first.id, first.label, text)


def clean(corpus: ExplanationCorpus) -> ExplanationCorpus:
    """Drop null-labeled records; survivors keep their order and text."""
    survivors = tuple(r for r in corpus.records if r.label not in corpus.null_labels)
    return replace(corpus, records=survivors, labels=_infer_labels(survivors, corpus.null_labels))
