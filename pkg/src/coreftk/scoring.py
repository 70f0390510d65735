"""Pairwise coreference scorers.

Four interchangeable score sources feed the clustering stage: the lexical
baseline (every filter-surviving pair scores 1.0), the joint-representation
logistic scorer over externally encoded pair vectors, a chat-LLM Yes/No
classifier, and plain ingestion of externally computed score files.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import ParseError, UnresolvedPairError, ValidationError
from .filters import MentionPair
from .llm import ChatClient, LlmConfig
from .prompts import render_pair_prompt

SOURCES = ("lexical", "eq1", "external", "llm")


@dataclass(frozen=True)
class PairScore:
    pair: MentionPair
    score: float
    source: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score must be in [0, 1], got {self.score}")
        if self.source not in SOURCES:
            raise ValidationError(f"unknown score source: {self.source!r}")


@dataclass(frozen=True)
class PairRepresentation:
    """Joint representation of a mention pair: [v_a | v_b | v_a * v_b]."""

    v_a: np.ndarray
    v_b: np.ndarray
    joint: np.ndarray


@dataclass(frozen=True)
class LogisticHead:
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValidationError("logistic head has non-finite entries")

    @classmethod
    def load(cls, path: str) -> "LogisticHead":
        import json
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(weights=np.asarray(raw["weights"], dtype=np.float64),
                   bias=float(raw["bias"]))


def joint_pair_representation(v_a, v_b) -> PairRepresentation:
    """Concatenate the two mention vectors with their element-wise product.

    The layout is fixed: blocks [0, d) and [d, 2d) are the raw vectors,
    block [2d, 3d) is their product.
    """
    v_a = np.asarray(v_a, dtype=np.float64)
    v_b = np.asarray(v_b, dtype=np.float64)
    if v_a.ndim != 1 or v_b.ndim != 1:
        raise ValidationError("mention vectors must be one-dimensional")
    if v_a.shape[0] != v_b.shape[0]:
        raise ValidationError(
            f"dimension mismatch: {v_a.shape[0]} vs {v_b.shape[0]}")
    if v_a.shape[0] < 1:
        raise ValidationError("mention vectors must have dimension >= 1")
    joint = np.concatenate([v_a, v_b, v_a * v_b])
    return PairRepresentation(v_a=v_a, v_b=v_b, joint=joint)


def eq1_score(rep: PairRepresentation, head: LogisticHead) -> float:
    """Sigmoid of the logistic head applied to the joint representation."""
    if head.weights.shape[0] != rep.joint.shape[0]:
        raise ValidationError(
            f"head dimension {head.weights.shape[0]} does not match joint "
            f"dimension {rep.joint.shape[0]}")
    z = float(np.dot(head.weights, rep.joint)) + head.bias
    # numerically stable logistic
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


def lexical_score(filtered: list[MentionPair]) -> list[PairScore]:
    """The LH baseline: every surviving pair is a coreference link."""
    seen = set()
    out = []
    for pair in filtered:
        if pair in seen:
            raise ValidationError(f"duplicate pair ({pair.a}, {pair.b})")
        seen.add(pair)
        out.append(PairScore(pair=pair, score=1.0, source="lexical"))
    return out


# -- score files -------------------------------------------------------------


def ingest_scores(path: str, corpus: Corpus | None = None,
                  source: str = "external") -> list[PairScore]:
    """Read a ``id_a<TAB>id_b<TAB>score`` file into canonical PairScores.

    Duplicate pairs (in either order) and out-of-range scores are
    rejected with the offending line number; mention ids are checked
    against ``corpus`` when given.
    """
    scores = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError("expected 'id_a<TAB>id_b<TAB>score'", path, lineno)
            try:
                value = float(parts[2])
            except ValueError:
                raise ParseError(f"invalid score {parts[2]!r}", path, lineno) from None
            if not 0.0 <= value <= 1.0:
                raise ParseError(f"score {value} out of [0, 1]", path, lineno)
            pair = MentionPair.of(parts[0], parts[1])
            if pair in seen:
                raise ParseError(f"duplicate pair ({pair.a}, {pair.b})", path, lineno)
            seen.add(pair)
            if corpus is not None:
                corpus.mention(pair.a)
                corpus.mention(pair.b)
            scores.append(PairScore(pair=pair, score=value, source=source))
    return scores


def export_scores(scores: list[PairScore], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in scores:
            fh.write(f"{s.pair.a}\t{s.pair.b}\t{repr(s.score)}\n")


# -- LLM Yes/No classifier ----------------------------------------------------

_FIRST_WORD = re.compile(r"[A-Za-z]+")


def _parse_verdict(reply: str) -> float | None:
    match = _FIRST_WORD.search(reply)
    if match is None:
        return None
    word = match.group(0).lower()
    if word == "yes":
        return 1.0
    if word == "no":
        return 0.0
    return None


def llm_classify_pair(corpus: Corpus, pair: MentionPair, client: ChatClient,
                      template: str | None = None) -> PairScore:
    """Ask the chat model whether the marked pair corefers.

    Only the first alphabetic token of the reply is read, case
    insensitively; anything that is not yes/no triggers a fresh request,
    up to the configured retry budget.
    """
    system, user = render_pair_prompt(corpus, pair, template)
    attempts = client.config.max_retries + 1
    for _ in range(attempts):
        reply = client.complete(system, user)
        verdict = _parse_verdict(reply)
        if verdict is not None:
            return PairScore(pair=pair, score=verdict, source="llm")
    raise UnresolvedPairError(
        f"no yes/no verdict for ({pair.a}, {pair.b}) after {attempts} attempts")


def llm_classify_pairs(corpus: Corpus, pairs: list[MentionPair], client: ChatClient,
                       template: str | None = None
                       ) -> tuple[list[PairScore], list[MentionPair]]:
    """Classify many pairs, preserving input order in the output.

    Runs up to ``config.max_in_flight`` concurrent requests. Pairs whose
    replies never parse are collected (not raised) so the pipeline can
    continue; they come back as the second element.
    """
    results: list[PairScore | None] = [None] * len(pairs)
    unresolved: list[MentionPair] = []

    def work(idx_pair):
        idx, pair = idx_pair
        try:
            return idx, llm_classify_pair(corpus, pair, client, template)
        except UnresolvedPairError:
            return idx, None

    with ThreadPoolExecutor(max_workers=client.config.max_in_flight) as pool:
        for idx, score in pool.map(work, enumerate(pairs)):
            results[idx] = score

    scores = []
    for pair, score in zip(pairs, results):
        if score is None:
            unresolved.append(pair)
        else:
            scores.append(score)
    return scores, unresolved


# -- pair-vector files (externally encoded Eq. 1 inputs) ----------------------


def load_pair_vectors(path: str) -> dict[MentionPair, tuple[np.ndarray, np.ndarray]]:
    """Read the pair-vector file: header ``d``, then
    ``id_a|id_b<TAB>va_1,..,va_d<TAB>vb_1,..,vb_d`` lines."""
    out: dict[MentionPair, tuple[np.ndarray, np.ndarray]] = {}
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
            parts = line.split("\t")
            if len(parts) != 3 or "|" not in parts[0]:
                raise ParseError(
                    "expected 'id_a|id_b<TAB>va_1,...<TAB>vb_1,...'", path, lineno)
            id_a, id_b = parts[0].split("|", 1)
            try:
                va = np.array([float(v) for v in parts[1].split(",")], dtype=np.float64)
                vb = np.array([float(v) for v in parts[2].split(",")], dtype=np.float64)
            except ValueError:
                raise ParseError("invalid vector component", path, lineno) from None
            if va.shape[0] != dim or vb.shape[0] != dim:
                raise ParseError(
                    f"vectors must have {dim} components each", path, lineno)
            pair = MentionPair.of(id_a, id_b)
            if pair in out:
                raise ParseError(f"duplicate pair ({pair.a}, {pair.b})", path, lineno)
            out[pair] = (va, vb)
    return out


def eq1_score_pairs(pair_vectors: dict[MentionPair, tuple[np.ndarray, np.ndarray]],
                    head: LogisticHead) -> list[PairScore]:
    out = []
    for pair in sorted(pair_vectors):
        va, vb = pair_vectors[pair]
        rep = joint_pair_representation(va, vb)
        out.append(PairScore(pair=pair, score=eq1_score(rep, head), source="eq1"))
    return out
