"""Final concept lexicon and the N x K binary concept matrix."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .corpus import ExplanationCorpus
from .errors import InterchangeFormatError
from .grouping import ConceptGroup
from .textmatch import contains, normalize


@dataclass(frozen=True)
class LexiconEntry:
    k: int
    representative: str  # display string
    members: tuple[str, ...]  # member norms
    count: int


@dataclass(frozen=True)
class ConceptLexicon:
    entries: tuple[LexiconEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_groups(cls, groups: list[ConceptGroup]) -> "ConceptLexicon":
        entries = tuple(
            LexiconEntry(k, g.representative.display, g.member_norms, g.group_count)
            for k, g in enumerate(groups)
        )
        reps = [e.representative for e in entries]
        if len(set(reps)) != len(reps):
            raise InterchangeFormatError("lexicon representatives must be unique")
        return cls(entries)


@dataclass(frozen=True)
class ConceptMatrix:
    ids: tuple[int, ...]
    entries: np.ndarray  # N x K, dtype int8
    lexicon: ConceptLexicon

    def __eq__(self, other):
        return (
            isinstance(other, ConceptMatrix)
            and self.ids == other.ids
            and self.lexicon == other.lexicon
            and np.array_equal(self.entries, other.entries)
        )


def vectorize(
    corpus: ExplanationCorpus,
    lexicon: ConceptLexicon,
    token_boundary: bool = True,
) -> ConceptMatrix:
    """C[n, k] = 1 iff any member norm of concept k occurs in explanation n."""
    n, k = len(corpus.records), len(lexicon)
    entries = np.zeros((n, k), dtype=np.int8)
    record_norms = [normalize(r.explanation) for r in corpus.records]
    for col, entry in enumerate(lexicon.entries):
        for row, rec_norm in enumerate(record_norms):
            if any(contains(rec_norm, m, token_boundary) for m in entry.members):
                entries[row, col] = 1
    return ConceptMatrix(tuple(r.id for r in corpus.records), entries, lexicon)


def save_matrix(matrix: ConceptMatrix, csv_path, lexicon_path) -> None:
    """Write the matrix CSV (`id,c0,...`) and the sidecar lexicon JSON."""
    k = len(matrix.lexicon)
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"c{i}" for i in range(k)])
        for rid, row in zip(matrix.ids, matrix.entries):
            writer.writerow([rid] + [int(v) for v in row])
    payload = {
        "concepts": [
            {
                "k": e.k,
                "representative": e.representative,
                "members": list(e.members),
                "count": e.count,
            }
            for e in matrix.lexicon.entries
        ]
    }
    with open(lexicon_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_lexicon(lexicon_path) -> ConceptLexicon:
    with open(lexicon_path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        entries = tuple(
            LexiconEntry(int(c["k"]), str(c["representative"]), tuple(c["members"]), int(c["count"]))
            for c in payload["concepts"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InterchangeFormatError(f"{lexicon_path}: bad lexicon payload") from exc
    if [e.k for e in entries] != list(range(len(entries))):
        raise InterchangeFormatError(f"{lexicon_path}: lexicon indices must be dense 0..K-1")
    return ConceptLexicon(entries)


def load_matrix(csv_path, lexicon_path) -> ConceptMatrix:
    lexicon = load_lexicon(lexicon_path)
    k = len(lexicon)
    expected_header = ["id"] + [f"c{i}" for i in range(k)]
    ids: list[int] = []
    rows: list[list[int]] = []
    with open(csv_path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise InterchangeFormatError(
                f"{csv_path}: header {header} does not match lexicon width {k}"
            )
        for line in reader:
            if not line:
                continue
            if len(line) != k + 1:
                raise InterchangeFormatError(f"{csv_path}: row width {len(line)} != {k + 1}")
            ids.append(int(line[0]))
            values = [int(v) for v in line[1:]]
            if any(v not in (0, 1) for v in values):
                raise InterchangeFormatError(f"{csv_path}: matrix entries must be 0/1")
            rows.append(values)
    entries = np.asarray(rows, dtype=np.int8).reshape(len(ids), k)
    return ConceptMatrix(tuple(ids), entries, lexicon)
