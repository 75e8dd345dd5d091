"""Text normalization and substring containment used by extraction, counting
and vectorization.

Normalization is deliberately mild: lowercase, collapse whitespace runs, strip
terminal punctuation. Internal punctuation is preserved so a fragment never
matches across sentence boundaries it did not span in the original text.
"""

from __future__ import annotations

import re

_WS_RE = re.compile(r"\s+")
_TERMINAL_PUNCT = ".!?,;:"

# Characters considered word-internal for token-boundary matching. The
# apostrophe is included so "don" never matches inside "don't".
_WORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789'")


def normalize(text: str) -> str:
    """Lowercase, collapse whitespace and strip terminal punctuation."""
    out = _WS_RE.sub(" ", text.lower()).strip()
    return out.rstrip(_TERMINAL_PUNCT).rstrip()


def contains(haystack_norm: str, fragment_norm: str, token_boundary: bool = True) -> bool:
    """True if ``fragment_norm`` occurs inside ``haystack_norm``.

    With ``token_boundary`` (the default) an occurrence only counts when it is
    not embedded in a longer word on either side, so "ball" does not match
    inside "ballpark". Both inputs are assumed normalized.
    """
    if not fragment_norm:
        return False
    if not token_boundary:
        return fragment_norm in haystack_norm
    start = 0
    n = len(fragment_norm)
    while True:
        idx = haystack_norm.find(fragment_norm, start)
        if idx < 0:
            return False
        before_ok = idx == 0 or haystack_norm[idx - 1] not in _WORD_CHARS
        after = idx + n
        after_ok = after == len(haystack_norm) or haystack_norm[after] not in _WORD_CHARS
        if before_ok and after_ok:
            return True
        start = idx + 1


def first_occurrence(haystack_norm: str, fragment_norm: str, token_boundary: bool = True) -> int:
    """Char offset of the first boundary-respecting occurrence, or -1."""
    if not fragment_norm:
        return -1
    start = 0
    n = len(fragment_norm)
    while True:
        idx = haystack_norm.find(fragment_norm, start)
        if idx < 0:
            return -1
        if not token_boundary:
            return idx
        before_ok = idx == 0 or haystack_norm[idx - 1] not in _WORD_CHARS
        after = idx + n
        after_ok = after == len(haystack_norm) or haystack_norm[after] not in _WORD_CHARS
        if before_ok and after_ok:
            return idx
        start = idx + 1
