"""Grouping of near-duplicate concepts: embeddings, the combined distance, and
deterministic agglomerative clustering.

The pairwise distance between two concepts adds a text distance over sentence
embeddings and a label distance scaled by ``lambda``:

    d(i, j) = d_text(v_i, v_j) + lambda * d_label(n_i, n_j)

``d_label`` is an evidence ratio: how much more probable the two label-count
vectors are under independent categorical distributions than under a shared
one, with a symmetric Dirichlet prior of concentration ``alpha``. The evidence
integral is replaced by a plug-in approximation: evaluate each count vector
under the posterior-mean parameter

    p(n | mean) = prod_l ((n_l + alpha) / (n + K*alpha)) ** n_l

and form exp(log p(n_i) + log p(n_j) - log p(n_i + n_j)). The log-space round
trip keeps small evidences from underflowing. Note d_label(a, a) > 0: identical
vectors do not have zero distance, but the ratio is < 1 when two vectors
plausibly share a distribution and > 1 when they do not.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import ExplanationCorpus
from .counting import RawConcept
from .errors import ConfigError, InterchangeFormatError, InterchangeLookupError

DEFAULT_EMBED_DIM = 768
_HASH_SEED = b"conceptminer-trigram-v1"


@dataclass(frozen=True)
class MetaDistanceParams:
    lam: float = 1.0
    alpha: float = 1.0
    text_metric: str = "cosine"  # cosine | manhattan

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.text_metric not in ("cosine", "manhattan"):
            raise ConfigError(f"unknown text metric {self.text_metric!r}")


@dataclass(frozen=True)
class ConceptGroup:
    members: tuple[RawConcept, ...]
    representative: RawConcept
    group_count: int
    group_label_counts: tuple[int, ...]
    first_pos: tuple[int, int] = field(default=(0, 0), compare=False)

    @property
    def member_norms(self) -> tuple[str, ...]:
        return tuple(m.norm for m in self.members)


# --- embeddings -------------------------------------------------------------


def embed_fallback(fragment: str, dim: int = DEFAULT_EMBED_DIM) -> np.ndarray:
    """Deterministic character-trigram hashed embedding, unit L2 norm."""
    if not fragment:
        raise ValueError("cannot embed an empty fragment")
    padded = f" {fragment} "
    vec = np.zeros(dim, dtype=np.float64)
    for i in range(len(padded) - 2):
        tri = padded[i:i + 3].encode("utf-8")
        digest = hashlib.blake2b(tri, digest_size=8, key=_HASH_SEED).digest()
        h = int.from_bytes(digest, "big")
        sign = 1.0 if h & 1 else -1.0
        vec[(h >> 1) % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        vec[0] = 1.0
        norm = 1.0
    return vec / norm


class EmbeddingSource:
    """Embeddings for concept norms: interchange file or hashed fallback."""

    def __init__(self, table: dict[str, np.ndarray] | None, dim: int):
        self._table = table
        self.dim = dim

    @classmethod
    def fallback(cls, dim: int = DEFAULT_EMBED_DIM) -> "EmbeddingSource":
        return cls(None, dim)

    @classmethod
    def from_file(cls, path) -> "EmbeddingSource":
        table: dict[str, np.ndarray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    text = str(obj["text"])
                    vec = np.asarray(obj["vector"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise InterchangeFormatError(f"{path}: bad embedding line {lineno}") from exc
                if vec.ndim != 1 or vec.size == 0 or not np.all(np.isfinite(vec)):
                    raise InterchangeFormatError(
                        f"{path}: line {lineno}: vector must be a finite 1-d array"
                    )
                if dim is None:
                    dim = int(vec.size)
                elif vec.size != dim:
                    raise InterchangeFormatError(
                        f"{path}: line {lineno}: dimension {vec.size} != {dim} seen earlier"
                    )
                table[text] = vec
        if dim is None:
            raise InterchangeFormatError(f"{path}: no embeddings found")
        return cls(table, dim)

    def embed(self, fragment: str) -> np.ndarray:
        if self._table is None:
            return embed_fallback(fragment, self.dim)
        try:
            return self._table[fragment]
        except KeyError:
            raise InterchangeLookupError(
                f"embedding interchange has no entry for {fragment!r}"
            ) from None


# --- distances --------------------------------------------------------------


def d_text(v_i: np.ndarray, v_j: np.ndarray, metric: str = "cosine") -> float:
    if v_i.shape != v_j.shape:
        raise ValueError(f"dimension mismatch {v_i.shape} vs {v_j.shape}")
    if metric == "manhattan":
        return float(np.abs(v_i - v_j).sum())
    if metric != "cosine":
        raise ConfigError(f"unknown text metric {metric!r}")
    ni, nj = float(np.linalg.norm(v_i)), float(np.linalg.norm(v_j))
    if ni == 0.0 or nj == 0.0:
        raise ValueError("cosine distance is undefined for a zero vector")
    return 1.0 - float(np.dot(v_i, v_j)) / (ni * nj)


def plugin_log_evidence(counts, alpha: float) -> float:
    """log p(n | posterior-mean parameter); 0 for the empty count vector."""
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("label counts must be nonnegative")
    n = float(counts.sum())
    if n == 0.0:
        return 0.0
    k = counts.size
    log_p = np.log((counts + alpha) / (n + k * alpha))
    return float(np.dot(counts, log_p))


def d_label(counts_i, counts_j, alpha: float = 1.0) -> float:
    counts_i = np.asarray(counts_i, dtype=np.float64)
    counts_j = np.asarray(counts_j, dtype=np.float64)
    if counts_i.shape != counts_j.shape:
        raise ValueError(f"label-count length mismatch {counts_i.shape} vs {counts_j.shape}")
    log_ratio = (
        plugin_log_evidence(counts_i, alpha)
        + plugin_log_evidence(counts_j, alpha)
        - plugin_log_evidence(counts_i + counts_j, alpha)
    )
    return math.exp(log_ratio)


def meta_distance(
    c_i: RawConcept,
    c_j: RawConcept,
    v_i: np.ndarray,
    v_j: np.ndarray,
    params: MetaDistanceParams,
) -> float:
    text = d_text(v_i, v_j, params.text_metric)
    if params.lam == 0.0:
        return text
    return text + params.lam * d_label(c_i.label_counts, c_j.label_counts, params.alpha)


# --- clustering -------------------------------------------------------------

_LINKAGES = ("average", "complete", "single")


def cluster(
    concepts: list[RawConcept],
    embeddings: EmbeddingSource,
    params: MetaDistanceParams,
    linkage: str = "average",
    cut_threshold: float = 0.45,
    containment: dict[int, set[str]] | None = None,
    corpus: ExplanationCorpus | None = None,
) -> list[ConceptGroup]:
    """Agglomerative clustering under the combined distance.

    Merging stops once the smallest inter-cluster linkage distance exceeds
    ``cut_threshold``. The result is permutation-invariant: concepts are
    canonicalized by norm before clustering and distance ties resolve to the
    lexicographically earliest pair. Groups come back ordered by descending
    group count, then first containment position, then representative norm.
    """
    if linkage not in _LINKAGES:
        raise ConfigError(f"unknown linkage {linkage!r}")
    if not concepts:
        raise ValueError("cannot cluster an empty concept set")
    order = sorted(range(len(concepts)), key=lambda i: concepts[i].norm)
    ordered = [concepts[i] for i in order]
    vectors = [embeddings.embed(c.norm) for c in ordered]

    n = len(ordered)
    dist = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = meta_distance(
                ordered[i], ordered[j], vectors[i], vectors[j], params
            )

    clusters: list[list[int] | None] = [[i] for i in range(n)]
    active = list(range(n))
    work = dist.copy()
    np.fill_diagonal(work, np.inf)
    while len(active) > 1:
        sub = work[np.ix_(active, active)]
        flat = int(np.argmin(sub))
        ai, aj = divmod(flat, len(active))
        if ai > aj:
            ai, aj = aj, ai
        if sub[ai, aj] > cut_threshold:
            break
        i, j = active[ai], active[aj]
        members_i, members_j = clusters[i], clusters[j]
        merged = members_i + members_j
        # Lance-Williams update against every other active cluster
        for k in active:
            if k in (i, j):
                continue
            dik, djk = work[i, k], work[j, k]
            if linkage == "average":
                new = (len(members_i) * dik + len(members_j) * djk) / len(merged)
            elif linkage == "complete":
                new = max(dik, djk)
            else:
                new = min(dik, djk)
            work[i, k] = work[k, i] = new
        clusters[i] = merged
        clusters[j] = None
        active.remove(j)

    groups = []
    for idx in active:
        members = [ordered[m] for m in clusters[idx]]
        groups.append(_make_group(members, containment, corpus))
    groups.sort(key=lambda g: (-g.group_count, g.first_pos, g.representative.norm))
    return groups


def _make_group(members, containment, corpus) -> ConceptGroup:
    members = tuple(sorted(members, key=lambda c: c.norm))
    # representative: maximal count, ties broken by earliest norm
    top_count = max(c.count for c in members)
    representative = min((c for c in members if c.count == top_count), key=lambda c: c.norm)
    if containment is not None and corpus is not None:
        norms = {m.norm for m in members}
        label_index = {label: i for i, label in enumerate(corpus.labels)}
        label_counts = [0] * len(corpus.labels)
        count = 0
        for rec in corpus.records:
            if containment[rec.id] & norms:
                count += 1
                label_counts[label_index[rec.label]] += 1
        group_count, group_label_counts = count, tuple(label_counts)
    else:
        group_count = max(c.count for c in members)
        group_label_counts = representative.label_counts
    first_pos = min(m.first_pos for m in members)
    return ConceptGroup(members, representative, group_count, group_label_counts, first_pos)


def filter_rare(groups: list[ConceptGroup], t: int) -> list[ConceptGroup]:
    """Drop groups contained in fewer than ``t`` explanations."""
    if t < 1:
        raise ConfigError(f"frequency threshold must be >= 1, got {t}")
    return [g for g in groups if g.group_count >= t]


def singleton_groups(
    concepts: list[RawConcept],
    containment: dict[int, set[str]],
    corpus: ExplanationCorpus,
) -> list[ConceptGroup]:
    """Each concept its own group (the skip-grouping ablation)."""
    groups = [_make_group([c], containment, corpus) for c in concepts]
    groups.sort(key=lambda g: (-g.group_count, g.first_pos, g.representative.norm))
    return groups
