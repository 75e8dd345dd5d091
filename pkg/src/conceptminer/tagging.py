"""Tokenizer with a small rule-based Universal POS tagger.

This is the dependency-free fallback used when no parse interchange file is
supplied. Closed-class words come from built-in lexicons; open-class words get
NOUN/VERB/ADV heuristics (suffixes, a short irregular-verb list, and the
"open-class word right after AUX/PART is a verb" rule). Tokens keep character
offsets into the source text so fragments can be emitted with their original
casing and spacing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_SENT_SPLIT_RE = re.compile(r"[.!?]+(?:\s+|$)")
_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*|\d+|[^\w\s]")

_DET = {"the", "a", "an", "this", "these", "those", "my", "your", "his", "its", "our", "their", "some", "any", "each", "every", "no"}
_AUX_BE = {"be", "is", "are", "was", "were", "been", "being", "am"}
_AUX_DO = {"do", "does", "did"}
_AUX_HAVE = {"have", "has", "had"}
_AUX_MODAL = {"will", "would", "can", "could", "shall", "should", "may", "might", "must"}
_AUX = _AUX_BE | _AUX_DO | _AUX_HAVE | _AUX_MODAL
_PART = {"not", "n't"}
_SCONJ = {"because", "since", "although", "though", "if", "unless", "whereas", "while", "until", "whether", "when", "whenever"}
_CCONJ = {"and", "or", "but", "nor"}
_PRON = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "them", "us",
    "who", "whom", "what", "something", "someone", "anyone", "everyone",
    "nothing", "nobody", "itself", "himself", "herself", "themselves",
    "myself", "yourself", "ourselves", "there",
}
_ADP = {
    "in", "on", "at", "by", "of", "for", "with", "from", "into", "onto",
    "over", "under", "above", "below", "near", "behind", "through", "across",
    "during", "without", "within", "outside", "inside", "to", "toward",
    "towards", "off", "out", "around", "between", "along", "against",
    "about", "after", "before", "past", "up", "down",
}
_ADV = {"very", "quickly", "slowly", "just", "too", "also", "then", "again", "almost", "never", "always"}

# Common irregular past/base forms that the suffix rules miss.
_IRREGULAR_VERBS = {
    "hit", "caught", "swung", "threw", "thrown", "ran", "flew", "made",
    "took", "went", "got", "saw", "came", "won", "lost", "fell", "held",
    "kept", "stood", "struck", "left", "put", "let", "began", "broke",
    "brought", "gave", "knew", "said", "sent", "told",
}

# Lemma table for the closed classes that need one (AUX lemma drives the
# Table-1 "auxiliary whose lemma is be" rule).
_LEMMAS = {w: "be" for w in _AUX_BE}
_LEMMAS.update({w: "do" for w in _AUX_DO})
_LEMMAS.update({w: "have" for w in _AUX_HAVE})
_LEMMAS["n't"] = "not"

STOPWORDS = (
    _DET | _AUX | _PART | _SCONJ | _CCONJ | _PRON | _ADP
    | {"there", "here", "so", "as", "that", "than", "very", "just", "then", "too", "also"}
)


@dataclass(frozen=True)
class Token:
    text: str
    lemma: str
    upos: str
    start: int  # char offset into the source text
    end: int

    @property
    def is_word(self) -> bool:
        return self.upos != "PUNCT"


def _lexical_upos(lower: str) -> str | None:
    if lower in _DET:
        return "DET"
    if lower in _AUX:
        return "AUX"
    if lower in _PART:
        return "PART"
    if lower in _SCONJ:
        return "SCONJ"
    if lower in _CCONJ:
        return "CCONJ"
    if lower in _PRON:
        return "PRON"
    if lower in _ADP:
        return "ADP"
    if lower in _ADV:
        return "ADV"
    return None


def _open_class_upos(lower: str, prev_upos: str | None) -> str:
    if prev_upos in ("AUX", "PART"):
        return "VERB"
    if lower in _IRREGULAR_VERBS:
        return "VERB"
    if len(lower) > 4 and (lower.endswith("ed") or lower.endswith("ing")):
        return "VERB"
    if len(lower) > 3 and lower.endswith("ly"):
        return "ADV"
    if lower.isdigit():
        return "NUM"
    return "NOUN"


def tokenize(text: str) -> list[list[Token]]:
    """Split ``text`` into sentences of tagged tokens.

    Sentences split on runs of terminal punctuation; the terminal marks are
    consumed. Internal punctuation is kept as PUNCT tokens (the chunker uses
    them as clause boundaries). Contractions like "didn't" split into
    "did" + "n't".
    """
    sentences: list[list[Token]] = []
    pos = 0
    for match in list(_SENT_SPLIT_RE.finditer(text)) + [None]:
        if match is None:
            seg, seg_start = text[pos:], pos
        else:
            seg, seg_start = text[pos:match.start()], pos
            pos = match.end()
        tokens = _tokenize_segment(seg, seg_start)
        if tokens:
            sentences.append(tokens)
        if match is None:
            break
    return sentences


def _tokenize_segment(segment: str, offset: int) -> list[Token]:
    tokens: list[Token] = []
    prev_word_upos: str | None = None
    for m in _TOKEN_RE.finditer(segment):
        raw = m.group(0)
        start, end = offset + m.start(), offset + m.end()
        if not raw[0].isalnum():
            tokens.append(Token(raw, raw, "PUNCT", start, end))
            continue
        for part, p_start, p_end in _split_contraction(raw, start):
            lower = part.lower()
            upos = _lexical_upos(lower)
            if upos is None:
                upos = _open_class_upos(lower, prev_word_upos)
            lemma = _LEMMAS.get(lower, lower)
            tokens.append(Token(part, lemma, upos, p_start, p_end))
            prev_word_upos = upos
    return tokens


def _split_contraction(word: str, start: int):
    lower = word.lower()
    if len(lower) > 3 and lower.endswith("n't"):
        stem_len = len(word) - 3
        yield word[:stem_len], start, start + stem_len
        yield word[stem_len:], start + stem_len, start + len(word)
    elif "'" in lower and not lower.endswith("n't"):
        apos = word.index("'")
        if 0 < apos < len(word) - 1:
            yield word[:apos], start, start + apos
            yield word[apos:], start + apos, start + len(word)
        else:
            yield word, start, start + len(word)
    else:
        yield word, start, start + len(word)
