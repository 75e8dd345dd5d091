"""Built-in linguistic analysis: a small rule tagger and chunker that emit the
core pipeline's parse interchange structure without any model downloads.

This is an independent implementation kept deliberately simple: closed-class
lexicons for function words, suffix plus irregular-form heuristics for verbs,
and a shallow tree per sentence (clause chunks split at conjunctions and
punctuation, with noun-phrase-plus-preposition spans below each clause).
"""

from __future__ import annotations

import re

_SENT_RE = re.compile(r"[.!?]+(?:\s+|$)")
_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*|\d+|[^\w\s]")

DET = {"the", "a", "an", "this", "these", "those", "my", "your", "his", "its", "our", "their", "some", "any", "each", "every", "no"}
AUX_BE = {"be", "is", "are", "was", "were", "been", "being", "am"}
AUX = AUX_BE | {"do", "does", "did", "have", "has", "had", "will", "would", "can", "could", "shall", "should", "may", "might", "must"}
PART = {"not", "n't"}
SCONJ = {"because", "since", "although", "though", "if", "unless", "whereas", "while", "until", "whether", "when", "whenever"}
CCONJ = {"and", "or", "but", "nor"}
PRON = {"i", "you", "he", "she", "it", "we", "they", "me", "him", "them", "us", "who", "whom", "what", "something", "someone", "anyone", "everyone", "nothing", "nobody", "there"}
ADP = {"in", "on", "at", "by", "of", "for", "with", "from", "into", "onto", "over", "under", "above", "below", "near", "behind", "through", "across", "during", "without", "within", "outside", "inside", "to", "toward", "towards", "off", "out", "around", "between", "along", "against", "about", "after", "before", "past", "up", "down"}
IRREGULAR_VERBS = {"hit", "caught", "swung", "threw", "thrown", "ran", "flew", "made", "took", "went", "got", "saw", "came", "won", "lost", "fell", "held", "kept", "stood", "struck", "left", "put", "let", "began", "broke", "brought", "gave", "knew", "said", "sent", "told"}

LEMMAS = {w: "be" for w in AUX_BE}
LEMMAS.update({"do": "do", "does": "do", "did": "do", "have": "have", "has": "have", "had": "have", "n't": "not"})

NOMINAL = {"DET", "ADJ", "NUM", "NOUN", "PROPN"}
NOMINAL_HEAD = {"NOUN", "PROPN", "PRON"}


def _closed_class(word: str) -> str | None:
    for tagset, tag in ((DET, "DET"), (AUX, "AUX"), (PART, "PART"), (SCONJ, "SCONJ"),
                        (CCONJ, "CCONJ"), (PRON, "PRON"), (ADP, "ADP")):
        if word in tagset:
            return tag
    return None


def _open_class(word: str, prev: str | None) -> str:
    if prev in ("AUX", "PART"):
        return "VERB"
    if word in IRREGULAR_VERBS:
        return "VERB"
    if len(word) > 4 and (word.endswith("ed") or word.endswith("ing")):
        return "VERB"
    if len(word) > 3 and word.endswith("ly"):
        return "ADV"
    if word.isdigit():
        return "NUM"
    return "NOUN"


def tag_sentences(text: str) -> list[list[dict]]:
    """Sentences of ``{"text", "lemma", "upos"}`` token dicts."""
    sentences = []
    pos = 0
    boundaries = [m for m in _SENT_RE.finditer(text)]
    segments = []
    for m in boundaries:
        segments.append(text[pos:m.start()])
        pos = m.end()
    segments.append(text[pos:])
    for segment in segments:
        tokens = []
        prev = None
        for m in _TOKEN_RE.finditer(segment):
            raw = m.group(0)
            if not raw[0].isalnum():
                tokens.append({"text": raw, "lemma": raw, "upos": "PUNCT"})
                continue
            for part in _split_contraction(raw):
                lower = part.lower()
                upos = _closed_class(lower) or _open_class(lower, prev)
                tokens.append({"text": part, "lemma": LEMMAS.get(lower, lower), "upos": upos})
                prev = upos
        if tokens:
            sentences.append(tokens)
    return sentences


def _split_contraction(word: str):
    lower = word.lower()
    if len(lower) > 3 and lower.endswith("n't"):
        yield word[:-3]
        yield word[-3:]
    else:
        yield word


def build_tree(tokens: list[dict]) -> dict:
    """Shallow constituent tree over one tagged sentence."""
    n = len(tokens)
    clauses = _clause_spans(tokens)
    if len(clauses) == 1 and clauses[0] == (0, n):
        return {"span": [0, n], "label": "S", "children": _np_children(tokens, 0, n)}
    children = [
        {"span": [s, e], "label": "CLAUSE", "children": _np_children(tokens, s, e)}
        for s, e in clauses
    ]
    return {"span": [0, n], "label": "S", "children": children}


def _clause_spans(tokens):
    spans, start = [], None
    for i, tok in enumerate(tokens):
        if tok["upos"] in ("CCONJ", "PUNCT"):
            if start is not None:
                spans.append((start, i))
                start = None
        elif tok["upos"] == "SCONJ":
            if start is not None:
                spans.append((start, i))
            start = i
        elif start is None:
            start = i
    if start is not None:
        spans.append((start, len(tokens)))
    return spans or [(0, len(tokens))]


def _np_children(tokens, cs, ce):
    children = []
    i = cs
    while i < ce:
        span = _np_run(tokens, i, ce)
        if span is None:
            i += 1
            continue
        start, end = span
        while end < ce and tokens[end]["upos"] == "ADP":
            attached = _np_run(tokens, end + 1, ce)
            if attached is None or attached[0] != end + 1:
                break
            end = attached[1]
        children.append({"span": [start, end], "label": "NP", "children": []})
        i = end
    return children


def _np_run(tokens, i, ce):
    if i >= ce:
        return None
    if tokens[i]["upos"] == "PRON":
        return (i, i + 1)
    if tokens[i]["upos"] not in NOMINAL:
        return None
    j, saw_head = i, False
    while j < ce and tokens[j]["upos"] in NOMINAL:
        if tokens[j]["upos"] in NOMINAL_HEAD:
            saw_head = True
        j += 1
    return (i, j) if saw_head else None


def analyze_record(text: str) -> list[dict]:
    """Interchange sentence entries for one explanation."""
    out = []
    for tokens in tag_sentences(text):
        out.append({"tokens": tokens, "root": build_tree(tokens)})
    return out
