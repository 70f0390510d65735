"""Mention-pair candidate generation and pruning.

Two filters are provided: the lemma heuristic (LH), which keeps pairs
whose head lemmas are identical or mined-synonymous and whose sentences
overlap lexically above a threshold, and cosine K-nearest-neighbor
retrieval over per-mention embedding vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, Mention, mention_lemma
from .errors import NotFoundError, ParseError, ValidationError

INTRA_TOPIC = "intra-topic"
CORPUS_WIDE = "corpus-wide"


@dataclass(frozen=True, order=True)
class MentionPair:
    """Unordered mention-id pair stored in canonical (lexicographic) order."""

    a: str
    b: str

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"pair of a mention with itself: {self.a!r}")
        if self.a > self.b:
            raise ValidationError(
                f"pair not canonical: {self.a!r} > {self.b!r} (use MentionPair.of)")

    @classmethod
    def of(cls, x: str, y: str) -> "MentionPair":
        return cls(x, y) if x < y else cls(y, x)


@dataclass(frozen=True)
class SynonymSet:
    """Symmetric set of lowercased lemma pairs."""

    pairs: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        for x, y in self.pairs:
            if x == y:
                raise ValidationError(f"synonym pair of a lemma with itself: {x!r}")
            if x > y:
                raise ValidationError(f"synonym pair not canonical: ({x!r}, {y!r})")

    @classmethod
    def of(cls, pairs) -> "SynonymSet":
        return cls(frozenset(tuple(sorted(p)) for p in pairs))

    def contains(self, x: str, y: str) -> bool:
        return (x, y) in self.pairs if x < y else (y, x) in self.pairs

    def __or__(self, other: "SynonymSet") -> "SynonymSet":
        return SynonymSet(self.pairs | other.pairs)

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class LhConfig:
    overlap_threshold: float = 0.005
    use_stopwords: bool = False

    def __post_init__(self):
        if not 0.0 <= self.overlap_threshold <= 1.0:
            raise ValidationError(
                f"overlap threshold must be in [0, 1], got {self.overlap_threshold}")


@dataclass(frozen=True)
class KnnConfig:
    k: int = 10
    scope: str = INTRA_TOPIC

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError(f"k must be >= 0, got {self.k}")
        if self.scope not in (INTRA_TOPIC, CORPUS_WIDE):
            raise ValidationError(f"unknown scope: {self.scope!r}")


class EmbeddingTable:
    """Mention id -> dense vector map with a uniform dimension.

    Vectors must be finite and nonzero; violations are rejected at
    construction so cosine retrieval can assume clean input.
    """

    def __init__(self, vectors: dict[str, np.ndarray]):
        self.dim = None
        self._vectors: dict[str, np.ndarray] = {}
        for mid, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1:
                raise ValidationError(f"embedding for {mid!r} is not a vector")
            if self.dim is None:
                self.dim = arr.shape[0]
            elif arr.shape[0] != self.dim:
                raise ValidationError(
                    f"embedding for {mid!r} has dimension {arr.shape[0]}, "
                    f"expected {self.dim}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"embedding for {mid!r} has non-finite entries")
            if not np.any(arr):
                raise ValidationError(f"embedding for {mid!r} is the zero vector")
            self._vectors[mid] = arr

    def __contains__(self, mention_id: str) -> bool:
        return mention_id in self._vectors

    def __len__(self):
        return len(self._vectors)

    def vector(self, mention_id: str) -> np.ndarray:
        try:
            return self._vectors[mention_id]
        except KeyError:
            raise NotFoundError(f"no embedding for mention {mention_id!r}") from None

    @classmethod
    def load(cls, path: str) -> "EmbeddingTable":
        """Read the tab-separated embedding file (header line declares d)."""
        vectors = {}
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            try:
                dim = int(header)
            except ValueError:
                raise ParseError(f"header must declare the dimension, got {header!r}",
                                 path, 1) from None
            for lineno, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    mid, vals = line.split("\t")
                    vec = np.array([float(v) for v in vals.split(",")], dtype=np.float64)
                except ValueError:
                    raise ParseError("expected 'mention_id<TAB>v1,v2,...'",
                                     path, lineno) from None
                if vec.shape[0] != dim:
                    raise ParseError(
                        f"vector has {vec.shape[0]} components, header declared {dim}",
                        path, lineno)
                if mid in vectors:
                    raise ParseError(f"duplicate mention id {mid!r}", path, lineno)
                vectors[mid] = vec
        return cls(vectors)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.dim}\n")
            for mid in sorted(self._vectors):
                vals = ",".join(repr(float(v)) for v in self._vectors[mid])
                fh.write(f"{mid}\t{vals}\n")


def mine_synonym_pairs(corpus: Corpus, split: str) -> SynonymSet:
    """All unordered pairs of distinct head lemmas co-occurring in a gold
    cluster of the given split."""
    mentions = corpus.mentions_in_split(split)
    if not mentions:
        raise ValidationError(f"split {split!r} has no mentions")
    by_cluster: dict[str, list[str]] = {}
    for m in mentions:
        by_cluster.setdefault(m.gold_cluster_id, []).append(
            mention_lemma(corpus, m.mention_id))
    pairs = set()
    for lemmas in by_cluster.values():
        distinct = sorted(set(lemmas))
        for i in range(len(distinct)):
            for j in range(i + 1, len(distinct)):
                pairs.add((distinct[i], distinct[j]))
    return SynonymSet(frozenset(pairs))


def _sentence_lemmas(corpus: Corpus, mention: Mention, use_stopwords: bool) -> set[str]:
    sent = corpus.sentence_of(mention)
    out = set()
    for tok in sent.tokens:
        if tok.is_stopword and not use_stopwords:
            continue
        out.add((tok.lemma if tok.lemma else tok.text).lower())
    return out


def sentence_overlap_ratio(corpus: Corpus, pair: MentionPair,
                           config: LhConfig = LhConfig()) -> float:
    """Jaccard overlap of the two mention sentences' lemma sets.

    Stopword lemmas are excluded unless ``config.use_stopwords``. Two
    sentences with no (qualifying) lemmas at all overlap 0.
    """
    la = _sentence_lemmas(corpus, corpus.mention(pair.a), config.use_stopwords)
    lb = _sentence_lemmas(corpus, corpus.mention(pair.b), config.use_stopwords)
    union = la | lb
    if not union:
        return 0.0
    return len(la & lb) / len(union)


def lh_filter(corpus: Corpus, candidates: list[MentionPair], syn: SynonymSet,
              config: LhConfig = LhConfig()) -> list[MentionPair]:
    """Keep pairs whose head lemmas match (identical or synonymous) and
    whose sentence overlap ratio meets the threshold. Output is sorted."""
    kept = []
    for pair in candidates:
        la = mention_lemma(corpus, pair.a)
        lb = mention_lemma(corpus, pair.b)
        if la != lb and not syn.contains(la, lb):
            continue
        if sentence_overlap_ratio(corpus, pair, config) < config.overlap_threshold:
            continue
        kept.append(pair)
    return sorted(set(kept))


def all_pairs(corpus: Corpus, split: str, scope: str = INTRA_TOPIC) -> list[MentionPair]:
    """Exhaustive candidate baseline: every unordered in-scope pair."""
    if scope not in (INTRA_TOPIC, CORPUS_WIDE):
        raise ValidationError(f"unknown scope: {scope!r}")
    mentions = corpus.mentions_in_split(split)
    ids = sorted(m.mention_id for m in mentions)
    pairs = []
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if scope == INTRA_TOPIC and corpus.topic_of(ids[i]) != corpus.topic_of(ids[j]):
                continue
            pairs.append(MentionPair(ids[i], ids[j]))
    return pairs


def knn_candidates(embeddings: EmbeddingTable, corpus: Corpus, split: str,
                   config: KnnConfig = KnnConfig()) -> list[MentionPair]:
    """Union over mentions of their k most cosine-similar in-scope
    neighbors, deduplicated and in canonical order.

    Ties on similarity break by lexicographic mention id. The result is
    invariant under uniform positive scaling of all vectors.
    """
    mentions = corpus.mentions_in_split(split)
    ids = sorted(m.mention_id for m in mentions)
    for mid in ids:
        if mid not in embeddings:
            raise NotFoundError(f"no embedding for mention {mid!r}")
    if config.k == 0 or len(ids) < 2:
        return []

    if config.scope == INTRA_TOPIC:
        groups: dict[str, list[str]] = {}
        for mid in ids:
            groups.setdefault(corpus.topic_of(mid), []).append(mid)
        scopes = [groups[t] for t in sorted(groups)]
    else:
        scopes = [ids]

    pairs: set[MentionPair] = set()
    for scope_ids in scopes:
        if len(scope_ids) < 2:
            continue
        mat = np.stack([embeddings.vector(mid) for mid in scope_ids])
        norms = np.sqrt((mat * mat).sum(axis=1))
        unit = mat / norms[:, None]
        sims = unit @ unit.T
        for i, mid in enumerate(scope_ids):
            order = sorted(
                (j for j in range(len(scope_ids)) if j != i),
                key=lambda j: (-sims[i, j], scope_ids[j]))
            for j in order[:config.k]:
                pairs.add(MentionPair.of(mid, scope_ids[j]))
    return sorted(pairs)


# -- candidate pair file ----------------------------------------------------


def save_pairs(pairs: list[MentionPair], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.a}\t{p.b}\n")


def load_pairs(path: str, corpus: Corpus | None = None) -> list[MentionPair]:
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 'id_a<TAB>id_b'", path, lineno)
            pair = MentionPair.of(*parts)
            if pair in seen:
                raise ParseError(f"duplicate pair ({pair.a}, {pair.b})", path, lineno)
            seen.add(pair)
            if corpus is not None:
                corpus.mention(pair.a)
                corpus.mention(pair.b)
            pairs.append(pair)
    return pairs
