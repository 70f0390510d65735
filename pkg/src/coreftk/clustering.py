"""Turning pairwise scores into a partition of mentions.

Connected components serve the lemma-heuristic pipelines; greedy
agglomeration serves the KNN pipelines. Cluster ids are deterministic:
each cluster is named after its smallest member mention id, so identical
inputs always produce byte-identical assignment files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernels
from .corpus import Corpus
from .errors import ParseError, ValidationError
from .filters import MentionPair
from .scoring import PairScore


@dataclass(frozen=True)
class ClusterAssignment:
    """Total map of mention id -> predicted cluster id."""

    assignments: dict[str, str] = field(default_factory=dict)

    def clusters(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for mid, cid in self.assignments.items():
            out.setdefault(cid, set()).add(mid)
        return out

    def mention_ids(self) -> set[str]:
        return set(self.assignments)

    def __len__(self):
        return len(self.assignments)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for mid in sorted(self.assignments):
                fh.write(f"{mid}\t{self.assignments[mid]}\n")

    @classmethod
    def load(cls, path: str) -> "ClusterAssignment":
        assignments = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ParseError("expected 'mention_id<TAB>cluster_id'", path, lineno)
                if parts[0] in assignments:
                    raise ParseError(f"duplicate mention id {parts[0]!r}", path, lineno)
                assignments[parts[0]] = parts[1]
        return cls(assignments)


@dataclass(frozen=True)
class AggloConfig:
    linkage: str = "average"
    stop_threshold: float = 0.5

    def __post_init__(self):
        if self.linkage not in ("average", "max"):
            raise ValidationError(f"unknown linkage: {self.linkage!r}")
        if not 0.0 <= self.stop_threshold <= 1.0:
            raise ValidationError(
                f"stop threshold must be in [0, 1], got {self.stop_threshold}")


def _check_endpoints(mentions: set[str], scores) -> None:
    for s in scores:
        for mid in (s.pair.a, s.pair.b):
            if mid not in mentions:
                raise ValidationError(f"pair endpoint outside mention set: {mid!r}")


def _labels_to_assignment(ids: list[str], labels: list[int]) -> ClusterAssignment:
    # label values are the smallest member index, so ids[label] is the
    # smallest member mention id of each cluster
    return ClusterAssignment({mid: ids[label] for mid, label in zip(ids, labels)})


def connected_components(mentions: set[str], links: list[PairScore],
                         link_threshold: float = 0.5) -> ClusterAssignment:
    """Partition by transitive closure over edges scoring >= threshold."""
    _check_endpoints(mentions, links)
    ids = sorted(mentions)
    index = {mid: i for i, mid in enumerate(ids)}
    edges = [(index[s.pair.a], index[s.pair.b])
             for s in links if s.score >= link_threshold]
    labels = _kernels.union_find_components(len(ids), edges)
    return _labels_to_assignment(ids, labels)


def greedy_agglomeration(mentions: set[str], scores: list[PairScore],
                         config: AggloConfig = AggloConfig()) -> ClusterAssignment:
    """Bottom-up merging until the best cluster-pair linkage drops below
    the stop threshold.

    Scores cover an arbitrary subset of pairs; absent pairs count as 0.
    Merge ties break on the lexicographically smallest pair of cluster
    representatives (each cluster represented by its smallest member id),
    which makes the result independent of input order.
    """
    _check_endpoints(mentions, scores)
    ids = sorted(mentions)
    n = len(ids)
    if n == 0:
        return ClusterAssignment({})
    index = {mid: i for i, mid in enumerate(ids)}
    sim = [[0.0] * n for _ in range(n)]
    seen = set()
    for s in scores:
        if s.pair in seen:
            raise ValidationError(f"duplicate pair ({s.pair.a}, {s.pair.b})")
        seen.add(s.pair)
        i, j = index[s.pair.a], index[s.pair.b]
        sim[i][j] = s.score
        sim[j][i] = s.score
    linkage = (_kernels.LINKAGE_AVERAGE if config.linkage == "average"
               else _kernels.LINKAGE_MAX)
    labels = _kernels.agglomerate(sim, config.stop_threshold, linkage)
    return _labels_to_assignment(ids, labels)


def oracle_components(corpus: Corpus, retained: list[MentionPair],
                      split: str) -> ClusterAssignment:
    """Upper bound for a filter: components over retained pairs whose
    endpoints are gold-coreferent (a perfect classifier on retained pairs)."""
    mentions = {m.mention_id for m in corpus.mentions_in_split(split)}
    gold_links = []
    for pair in retained:
        if pair.a not in mentions or pair.b not in mentions:
            raise ValidationError(
                f"retained pair ({pair.a}, {pair.b}) outside split {split!r}")
        if (corpus.mention(pair.a).gold_cluster_id
                == corpus.mention(pair.b).gold_cluster_id):
            gold_links.append(PairScore(pair=pair, score=1.0, source="external"))
    return connected_components(mentions, gold_links, link_threshold=0.5)
