"""Completion: corpus-wide substring lookup and per-concept count vectors.

A record contains a concept when the concept's normalized form occurs inside
the record's normalized explanation (presence-based: multiple occurrences in
one explanation still count once). Completion never adds or removes concepts;
it only raises their counts.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import ExplanationCorpus
from .errors import ValidationError
from .extraction import RawConceptOccurrence
from .textmatch import contains, first_occurrence, normalize


@dataclass(frozen=True)
class RawConcept:
    index: int
    norm: str
    display: str  # most common original-casing surface
    count: int  # number of explanations containing the concept
    label_counts: tuple[int, ...]  # aligned with the corpus label order
    first_pos: tuple[int, int]  # (record position in corpus order, char offset)

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError(f"concept {self.norm!r} has count {self.count} < 1")
        if sum(self.label_counts) != self.count:
            raise ValidationError(
                f"concept {self.norm!r}: label counts {self.label_counts} do not sum to {self.count}"
            )


def complete(
    corpus: ExplanationCorpus,
    norms: list[str],
    occurrences: list[RawConceptOccurrence],
    token_boundary: bool = True,
):
    """Recompute containment for every concept across the whole corpus.

    Returns ``(concepts, containment)``: the concepts with refreshed counts and
    a per-record map ``record_id -> set of concept norms``.
    """
    label_index = {label: i for i, label in enumerate(corpus.labels)}
    record_norms = [(rec, normalize(rec.explanation)) for rec in corpus.records]

    display_votes: dict[str, Counter] = {}
    for occ in occurrences:
        display_votes.setdefault(occ.norm, Counter())[occ.fragment] += 1

    concepts: list[RawConcept] = []
    containment: dict[int, set[str]] = {rec.id: set() for rec in corpus.records}
    for idx, norm in enumerate(norms):
        count = 0
        label_counts = [0] * len(corpus.labels)
        first_pos = None
        for pos, (rec, rec_norm) in enumerate(record_norms):
            if contains(rec_norm, norm, token_boundary):
                count += 1
                label_counts[label_index[rec.label]] += 1
                containment[rec.id].add(norm)
                if first_pos is None:
                    first_pos = (pos, first_occurrence(rec_norm, norm, token_boundary))
        if count == 0:
            # an extracted fragment always occurs in its own record
            raise ValidationError(f"concept {norm!r} not found in any explanation")
        votes = display_votes.get(norm)
        display = _top_vote(votes) if votes else norm
        concepts.append(RawConcept(idx, norm, display, count, tuple(label_counts), first_pos))
    return concepts, containment


def _top_vote(votes: Counter) -> str:
    best_count = max(votes.values())
    return min(s for s, c in votes.items() if c == best_count)
