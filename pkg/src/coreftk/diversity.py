"""MTLD lexical diversity of event-cluster triggers.

The corpus-level figure is the cluster-size-weighted average of per
cluster MTLD values, computed over non-singleton gold clusters only.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .corpus import Corpus
from .errors import ValidationError

DEFAULT_TTR_THRESHOLD = 0.72

_EDGE_PUNCT = ".,;:!?\"'()[]{}`"


def mtld(tokens: list[str], ttr_threshold: float = DEFAULT_TTR_THRESHOLD) -> float:
    """Measure of textual lexical diversity: mean factor length.

    A factor completes each time the running type-token ratio falls below
    the threshold; the leftover tail counts fractionally. The final value
    is the mean of a forward and a backward pass. A pass with zero factors
    (the sequence never dips below the threshold and ends at TTR 1, e.g.
    all-distinct tokens) falls back to the sequence length N.
    """
    if not tokens:
        raise ValidationError("mtld needs a non-empty token list")
    vocab: dict[str, int] = {}
    ids = [vocab.setdefault(t, len(vocab)) for t in tokens]
    n = len(ids)

    def one_pass(seq) -> float:
        factors = _kernels.mtld_factor_count(seq, ttr_threshold)
        if factors == 0.0:
            return float(n)
        return n / factors

    return (one_pass(ids) + one_pass(ids[::-1])) / 2.0


@dataclass(frozen=True)
class DiversityReport:
    per_cluster: dict[str, tuple[float, int]]  # cluster id -> (mtld, size)
    corpus_weighted_mtld: float
    all_singletons: bool = False

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for cid in sorted(self.per_cluster):
                score, size = self.per_cluster[cid]
                fh.write(f"{cid}\t{size}\t{score:.6f}\n")
            fh.write(f"WEIGHTED\t{self.corpus_weighted_mtld:.6f}\n")


def trigger_tokens(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation at token edges."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


def cluster_diversity(corpus: Corpus, split: str,
                      ttr_threshold: float = DEFAULT_TTR_THRESHOLD) -> DiversityReport:
    """Per-cluster MTLD over member trigger tokens plus the size-weighted
    corpus aggregate.

    Singleton gold clusters are dropped first. Member triggers concatenate
    in (doc id, sentence index, token start) order; cluster size is the
    mention count. With no non-singleton clusters the report is empty,
    weighted value 0, and flagged.
    """
    mentions = corpus.mentions_in_split(split)
    by_cluster: dict[str, list] = {}
    for m in mentions:
        by_cluster.setdefault(m.gold_cluster_id, []).append(m)

    per_cluster: dict[str, tuple[float, int]] = {}
    weighted_sum = 0.0
    total_size = 0
    for cid, members in by_cluster.items():
        if len(members) < 2:
            continue
        members = sorted(members, key=lambda m: (m.doc_id, m.sentence_index,
                                                 m.token_start))
        tokens: list[str] = []
        for m in members:
            tokens.extend(trigger_tokens(m.trigger_text))
        score = mtld(tokens, ttr_threshold)
        per_cluster[cid] = (score, len(members))
        weighted_sum += score * len(members)
        total_size += len(members)

    if not per_cluster:
        return DiversityReport(per_cluster={}, corpus_weighted_mtld=0.0,
                               all_singletons=True)
    return DiversityReport(per_cluster=per_cluster,
                           corpus_weighted_mtld=weighted_sum / total_size)
