"""Raw-concept extraction: inclusion/exclusion rules over constituents.

A constituent is kept when it satisfies one of the two inclusion patterns
(anchored at its first NOUN/PRON) and no exclusion applies:

  include1   NOUN/PRON [AUX] [PART]     (both trailing tags optional)
  include2   NOUN/PRON AUX(lemma "be") followed by at least one more token
  excluded   any subordinating conjunction in the fragment

Two gates keep fragments concept-sized: a max token length (raw concepts are
short sequences of words) and rejection of bare nominal spans (a determiner
plus nouns predicates nothing). Among nested accepted constituents only the
outermost is emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import ExplanationCorpus
from .parsing import ConstituentNode, ParseSource
from .tagging import STOPWORDS, Token
from .textmatch import normalize

MATCH_EXCLUDED = "excluded"
MATCH_INCLUDE1 = "include1"
MATCH_INCLUDE2 = "include2"
MATCH_NONE = "none"

_ANCHOR = {"NOUN", "PROPN", "PRON"}
_BARE_NOMINAL = {"DET", "ADJ", "NUM", "NOUN", "PROPN", "PRON"}

DEFAULT_MAX_FRAGMENT_TOKENS = 7


@dataclass(frozen=True)
class RawConceptOccurrence:
    record_id: int
    fragment: str  # original casing, contiguous in the source text
    norm: str


def match_rules(fragment: list[Token]) -> str:
    """Classify a token fragment per the inclusion/exclusion rules."""
    if not fragment:
        raise ValueError("match_rules requires a non-empty fragment")
    if any(tok.upos == "SCONJ" for tok in fragment):
        return MATCH_EXCLUDED
    anchor = next((i for i, tok in enumerate(fragment) if tok.upos in _ANCHOR), None)
    if anchor is None:
        return MATCH_NONE
    nxt = fragment[anchor + 1] if anchor + 1 < len(fragment) else None
    if nxt is not None and nxt.upos == "AUX" and nxt.lemma == "be" and anchor + 2 < len(fragment):
        return MATCH_INCLUDE2
    # include1: optional single AUX, then optional single PART, both adjacent
    i = anchor + 1
    if i < len(fragment) and fragment[i].upos == "AUX":
        i += 1
    if i < len(fragment) and fragment[i].upos == "PART":
        i += 1
    return MATCH_INCLUDE1


def _word_tokens(sentence: list[Token], node: ConstituentNode) -> list[Token]:
    return [t for t in sentence[node.start:node.end] if t.is_word]


def fragment_accepted(tokens: list[Token], max_tokens: int = DEFAULT_MAX_FRAGMENT_TOKENS) -> bool:
    """Full acceptance test for a candidate constituent's word tokens."""
    if not tokens or len(tokens) > max_tokens:
        return False
    if all(tok.upos in _BARE_NOMINAL for tok in tokens):
        return False
    return match_rules(tokens) in (MATCH_INCLUDE1, MATCH_INCLUDE2)


def _fragment_text(sentence: list[Token], node: ConstituentNode, source_text: str | None) -> str:
    tokens = sentence[node.start:node.end]
    if source_text is not None and tokens[0].start >= 0:
        return source_text[tokens[0].start:tokens[-1].end]
    return detokenize(tokens)


def detokenize(tokens: list[Token]) -> str:
    """Rebuild surface text from tokens (used when char offsets are absent)."""
    out = ""
    for tok in tokens:
        if out and not (tok.text.startswith("'") or tok.text == "n't" or tok.upos == "PUNCT"):
            out += " "
        out += tok.text
    return out


def extract_raw_concepts(
    corpus: ExplanationCorpus,
    parses: ParseSource,
    max_fragment_tokens: int = DEFAULT_MAX_FRAGMENT_TOKENS,
    word_level: bool = False,
):
    """Extract the raw-concept set and its occurrences from a cleaned corpus.

    Returns ``(norms, occurrences)`` where ``norms`` is the ordered set of
    normalized fragments (first-appearance order over records) and
    ``occurrences`` lists one entry per (record, distinct norm).

    ``word_level`` is the ablation mode: every non-stopword token becomes a
    fragment and the rules are bypassed.
    """
    seen_norms: dict[str, None] = {}
    occurrences: list[RawConceptOccurrence] = []
    for record in corpus.records:
        per_record: dict[str, str] = {}
        for sentence, root in parses.sentences_for(record.id, record.explanation):
            if word_level:
                for tok in sentence:
                    if tok.is_word and tok.text.lower() not in STOPWORDS:
                        per_record.setdefault(normalize(tok.text), tok.text)
                continue
            root.validate()
            for node in _maximal_accepted(sentence, root, max_fragment_tokens):
                fragment = _fragment_text(sentence, node, record.explanation)
                norm = normalize(fragment)
                if norm:
                    per_record.setdefault(norm, fragment)
        for norm, fragment in per_record.items():
            occurrences.append(RawConceptOccurrence(record.id, fragment, norm))
            seen_norms.setdefault(norm)
    return list(seen_norms), occurrences


def _maximal_accepted(sentence, root, max_tokens):
    """Accepted constituents with no accepted ancestor, in document order."""
    out = []

    def visit(node):
        tokens = _word_tokens(sentence, node)
        if fragment_accepted(tokens, max_tokens):
            out.append(node)
            return
        for child in node.children:
            visit(child)

    visit(root)
    return out
