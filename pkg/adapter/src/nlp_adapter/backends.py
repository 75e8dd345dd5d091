"""Optional model-backed parser and encoder, with deterministic fallbacks.

Named models engage spaCy / sentence-transformers when the libraries import
and the weights load; any failure degrades to the built-in analyzer or the
hashed encoder, and the manifest records which backend actually ran.
"""

from __future__ import annotations

import hashlib
import math

from . import analysis

EMBED_DIM = 768
_HASH_KEY = b"nlp-adapter-trigram-v1"


class ParserBackend:
    def __init__(self, name: str):
        self.requested = name
        self.active = "builtin"
        self._nlp = None
        if name and name != "builtin":
            try:
                import spacy

                self._nlp = spacy.load(name)
                self.active = f"spacy:{name}"
            except Exception:
                self._nlp = None

    def analyze(self, text: str) -> list[dict]:
        if self._nlp is None:
            return analysis.analyze_record(text)
        return self._spacy_analyze(text)

    def _spacy_analyze(self, text: str) -> list[dict]:
        """Clause chunks derived from the dependency parse, same schema."""
        doc = self._nlp(text)
        sentences = []
        for sent in doc.sents:
            tokens = [
                {"text": t.text, "lemma": t.lemma_.lower(), "upos": t.pos_}
                for t in sent
            ]
            if not tokens:
                continue
            sentences.append({"tokens": tokens, "root": analysis.build_tree(tokens)})
        return sentences


class EncoderBackend:
    def __init__(self, name: str, dim: int = EMBED_DIM):
        self.requested = name
        self.active = "builtin"
        self.dim = dim
        self._model = None
        if name and name != "builtin":
            try:
                from sentence_transformers import SentenceTransformer

                self._model = SentenceTransformer(name)
                self.dim = int(self._model.get_sentence_embedding_dimension())
                self.active = f"sentence-transformers:{name}"
            except Exception:
                self._model = None

    def encode(self, texts: list[str]) -> list[list[float]]:
        if self._model is not None:
            return [vec.tolist() for vec in self._model.encode(texts, convert_to_numpy=True)]
        return [hashed_embedding(t, self.dim) for t in texts]


def hashed_embedding(text: str, dim: int = EMBED_DIM) -> list[float]:
    """Deterministic character-trigram embedding with unit L2 norm."""
    padded = f" {text} "
    vec = [0.0] * dim
    for i in range(len(padded) - 2):
        digest = hashlib.blake2b(
            padded[i:i + 3].encode("utf-8"), digest_size=8, key=_HASH_KEY
        ).digest()
        h = int.from_bytes(digest, "big")
        vec[(h >> 1) % dim] += 1.0 if h & 1 else -1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm == 0.0:
        vec[0], norm = 1.0, 1.0
    return [v / norm for v in vec]
