"""Coreference evaluation: MUC, B-cubed, CEAF-e, and the CoNLL average.

All three metrics follow the official scorer family conventions. CEAF-e
finds its optimal one-to-one cluster matching exactly (Hungarian-style
assignment in the kernels backend), not greedily. The mention sets of
gold and predicted assignments must coincide; singletons are evaluated
as annotated.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .clustering import ClusterAssignment, oracle_components
from .corpus import Corpus
from .errors import ValidationError
from .filters import MentionPair


@dataclass(frozen=True)
class Triple:
    recall: float
    precision: float
    f1: float


@dataclass(frozen=True)
class MetricReport:
    muc: Triple
    b3: Triple
    ceaf_e: Triple
    conll_f1: float

    def lines(self) -> list[str]:
        out = []
        for name, triple in (("muc", self.muc), ("b3", self.b3),
                             ("ceaf_e", self.ceaf_e)):
            out.append(f"{name}_recall\t{triple.recall:.6f}")
            out.append(f"{name}_precision\t{triple.precision:.6f}")
            out.append(f"{name}_f1\t{triple.f1:.6f}")
        out.append(f"conll_f1\t{self.conll_f1:.6f}")
        return out

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines()) + "\n")


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 2 * recall * precision / (recall + precision)


def _check_same_mentions(gold: ClusterAssignment, pred: ClusterAssignment) -> None:
    gset, pset = gold.mention_ids(), pred.mention_ids()
    if not gset:
        raise ValidationError("cannot evaluate an empty mention set")
    if gset != pset:
        only_gold = sorted(gset - pset)[:5]
        only_pred = sorted(pset - gset)[:5]
        raise ValidationError(
            f"mention sets differ (gold-only: {only_gold}, pred-only: {only_pred})")


def b3(gold: ClusterAssignment, pred: ClusterAssignment) -> Triple:
    """Mention-averaged cluster-overlap recall and precision."""
    _check_same_mentions(gold, pred)
    gold_clusters = gold.clusters()
    pred_clusters = pred.clusters()
    r_sum = 0.0
    p_sum = 0.0
    n = len(gold.assignments)
    for mid in gold.assignments:
        g = gold_clusters[gold.assignments[mid]]
        p = pred_clusters[pred.assignments[mid]]
        overlap = len(g & p)
        r_sum += overlap / len(g)
        p_sum += overlap / len(p)
    recall, precision = r_sum / n, p_sum / n
    return Triple(recall, precision, _f1(recall, precision))


def muc(gold: ClusterAssignment, pred: ClusterAssignment) -> Triple:
    """Link-based metric: minimal missing links over minimal gold links.

    Recall counts, per gold cluster, how many of its |g|-1 spanning links
    survive partitioning by the prediction; precision swaps the roles.
    All-singleton cases have no links on either side and score 0 by the
    0/0 convention.
    """
    _check_same_mentions(gold, pred)

    def directed(key: ClusterAssignment, response: ClusterAssignment) -> float:
        num = 0
        den = 0
        for cluster in key.clusters().values():
            partitions = {response.assignments[mid] for mid in cluster}
            num += len(cluster) - len(partitions)
            den += len(cluster) - 1
        return num / den if den else 0.0

    recall = directed(gold, pred)
    precision = directed(pred, gold)
    return Triple(recall, precision, _f1(recall, precision))


def ceaf_e(gold: ClusterAssignment, pred: ClusterAssignment) -> Triple:
    """Entity-based metric under the optimal one-to-one cluster matching.

    Cluster similarity is 2|g&p| / (|g|+|p|); the matching maximizing the
    total similarity is found exactly, then recall normalizes by the gold
    cluster count and precision by the predicted cluster count.
    """
    _check_same_mentions(gold, pred)
    gold_clusters = list(gold.clusters().values())
    pred_clusters = list(pred.clusters().values())
    sim = [[2 * len(g & p) / (len(g) + len(p)) for p in pred_clusters]
           for g in gold_clusters]
    _, total = _kernels.assignment_max(sim)
    recall = total / len(gold_clusters)
    precision = total / len(pred_clusters)
    return Triple(recall, precision, _f1(recall, precision))


def conll_f1(muc_f1: float, b3_f1: float, ceaf_e_f1: float) -> float:
    """Arithmetic mean of the three component F1 scores."""
    return (muc_f1 + b3_f1 + ceaf_e_f1) / 3.0


def evaluate(gold: ClusterAssignment, pred: ClusterAssignment) -> MetricReport:
    m = muc(gold, pred)
    b = b3(gold, pred)
    c = ceaf_e(gold, pred)
    return MetricReport(muc=m, b3=b, ceaf_e=c,
                        conll_f1=conll_f1(m.f1, b.f1, c.f1))


def gold_assignment(corpus: Corpus, split: str | None = None) -> ClusterAssignment:
    """The annotated partition as a ClusterAssignment (cluster ids are the
    gold chain ids)."""
    mentions = (corpus.mentions_in_split(split) if split
                else tuple(corpus.iter_mentions()))
    return ClusterAssignment({m.mention_id: m.gold_cluster_id for m in mentions})


def oracle_recall(corpus: Corpus, retained: list[MentionPair], split: str) -> float:
    """B-cubed recall of a perfect classifier restricted to retained pairs;
    the recall ceiling a filter imposes."""
    pred = oracle_components(corpus, retained, split)
    return b3(gold_assignment(corpus, split), pred).recall
