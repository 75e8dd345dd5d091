"""Constituent trees: the interchange reader and the built-in fallback chunker.

The fallback produces a shallow tree per sentence:

  root (full sentence)
    clause chunks        split at CCONJ / PUNCT; an SCONJ starts a new chunk
                         and stays inside it so the exclusion rule still sees it
      nominal spans      maximal NP runs with attached prepositional chains,
                         e.g. "the ball into the stands"

The nominal level exists because a clause can be too long to be a concept
while one of its noun phrases is exactly the fragment we want.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InterchangeFormatError, InterchangeLookupError, ValidationError
from .tagging import Token

_NOMINAL_HEAD = {"NOUN", "PROPN", "PRON"}
_NOMINAL_RUN = {"DET", "ADJ", "NUM", "NOUN", "PROPN"}


@dataclass(frozen=True)
class ConstituentNode:
    start: int  # token index within the sentence, inclusive
    end: int  # exclusive
    label: str
    children: tuple["ConstituentNode", ...] = field(default_factory=tuple)

    def validate(self) -> None:
        if self.end - self.start < 1:
            raise ValidationError(f"constituent span [{self.start},{self.end}) is empty")
        prev_end = self.start
        for child in self.children:
            if child.start < prev_end or child.end > self.end:
                raise ValidationError(
                    f"child span [{child.start},{child.end}) escapes parent"
                    f" [{self.start},{self.end}) or overlaps a sibling"
                )
            prev_end = child.end
            child.validate()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def fallback_parse(sentence: list[Token]) -> ConstituentNode:
    """Chunk one sentence into the shallow tree described above."""
    if not sentence:
        raise ValidationError("cannot parse an empty sentence")
    n = len(sentence)
    clauses = _clause_spans(sentence)
    children = []
    for cs, ce in clauses:
        nominals = tuple(
            ConstituentNode(s, e, "NP") for s, e in _nominal_spans(sentence, cs, ce)
        )
        if (cs, ce) == (0, n):
            # single-clause sentence: the root is the clause
            return ConstituentNode(0, n, "S", nominals)
        children.append(ConstituentNode(cs, ce, "CLAUSE", nominals))
    return ConstituentNode(0, n, "S", tuple(children))


def _clause_spans(sentence: list[Token]) -> list[tuple[int, int]]:
    spans = []
    start = None
    for i, tok in enumerate(sentence):
        if tok.upos in ("CCONJ", "PUNCT"):
            if start is not None:
                spans.append((start, i))
                start = None
        elif tok.upos == "SCONJ":
            if start is not None:
                spans.append((start, i))
            start = i  # subordinator opens and stays in the new chunk
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, len(sentence)))
    return spans


def _nominal_spans(sentence: list[Token], cs: int, ce: int) -> list[tuple[int, int]]:
    """Maximal [NP (ADP NP)*] runs inside a clause."""
    spans = []
    i = cs
    while i < ce:
        np = _np_run(sentence, i, ce)
        if np is None:
            i += 1
            continue
        start, end = np
        while end < ce and sentence[end].upos == "ADP":
            attached = _np_run(sentence, end + 1, ce)
            if attached is None or attached[0] != end + 1:
                break
            end = attached[1]
        spans.append((start, end))
        i = end
    return spans


def _np_run(sentence: list[Token], i: int, ce: int) -> tuple[int, int] | None:
    if i >= ce:
        return None
    tok = sentence[i]
    if tok.upos == "PRON":
        return (i, i + 1)
    if tok.upos not in _NOMINAL_RUN:
        return None
    j = i
    saw_head = False
    while j < ce and sentence[j].upos in _NOMINAL_RUN:
        if sentence[j].upos in _NOMINAL_HEAD:
            saw_head = True
        j += 1
    return (i, j) if saw_head else None


# --- parse interchange -----------------------------------------------------


def _node_from_json(obj) -> ConstituentNode:
    try:
        start, end = int(obj["span"][0]), int(obj["span"][1])
        label = str(obj.get("label", ""))
        children = tuple(_node_from_json(c) for c in obj.get("children", []))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InterchangeFormatError(f"bad constituent node: {obj!r}") from exc
    return ConstituentNode(start, end, label, children)


def node_to_json(node: ConstituentNode) -> dict:
    return {
        "span": [node.start, node.end],
        "label": node.label,
        "children": [node_to_json(c) for c in node.children],
    }


class ParseSource:
    """Sentence parses for a corpus: interchange file or the fallback chunker."""

    def __init__(self, by_record: dict[int, list[tuple[list[Token], ConstituentNode]]] | None):
        self._by_record = by_record  # None means fallback mode

    @classmethod
    def fallback(cls) -> "ParseSource":
        return cls(None)

    @classmethod
    def from_file(cls, path) -> "ParseSource":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InterchangeFormatError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict) or "records" not in data:
            raise InterchangeFormatError(f"{path}: expected an object with a 'records' list")
        by_record: dict[int, list[tuple[list[Token], ConstituentNode]]] = {}
        for rec in data["records"]:
            try:
                rid = int(rec["id"])
                sentences = rec["sentences"]
            except (KeyError, TypeError, ValueError) as exc:
                raise InterchangeFormatError(f"{path}: bad record entry: {rec!r}") from exc
            parsed = []
            for sent in sentences:
                try:
                    tokens = [
                        Token(str(t["text"]), str(t["lemma"]), str(t["upos"]), -1, -1)
                        for t in sent["tokens"]
                    ]
                    root = _node_from_json(sent["root"])
                except (KeyError, TypeError) as exc:
                    raise InterchangeFormatError(f"{path}: bad sentence in record {rid}") from exc
                root.validate()
                if root.end > len(tokens):
                    raise ValidationError(
                        f"record {rid}: root span [{root.start},{root.end}) exceeds"
                        f" {len(tokens)} tokens"
                    )
                parsed.append((tokens, root))
            by_record[rid] = parsed
        return cls(by_record)

    @property
    def is_fallback(self) -> bool:
        return self._by_record is None

    def sentences_for(self, record_id: int, text: str) -> list[tuple[list[Token], ConstituentNode]]:
        """Tokenized sentences with their trees for one record."""
        if self._by_record is None:
            from .tagging import tokenize

            return [(sent, fallback_parse(sent)) for sent in tokenize(text)]
        if record_id not in self._by_record:
            raise InterchangeLookupError(f"parse interchange has no record id {record_id}")
        return self._by_record[record_id]
