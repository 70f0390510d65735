"""Corpus data model, validation, and canonical serialization.

A corpus is a tree of topics -> documents -> tokenized sentences, plus
event mentions anchored to token spans and labeled with gold cluster ids
and a train/dev/dev_small/test split. Instances are immutable after
construction and validated eagerly, so downstream code can assume every
invariant holds.

The canonical on-disk form is UTF-8 JSON lines: one ``meta`` record
(corpus name and the split map), then ``topic``, ``document``,
``sentence``, and ``mention`` records in document order. An import
adapter for ECB+-style XML lives in :func:`ingest_ecb_xml`.
"""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

from .errors import NotFoundError, ParseError, ValidationError

SPLITS = ("train", "dev", "dev_small", "test")


@dataclass(frozen=True)
class Token:
    text: str
    lemma: Optional[str] = None
    is_stopword: bool = False


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]

    @property
    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)


@dataclass(frozen=True)
class Mention:
    mention_id: str
    doc_id: str
    sentence_index: int
    token_start: int
    token_end_exclusive: int
    trigger_text: str
    gold_cluster_id: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]
    mentions: tuple[Mention, ...] = ()


@dataclass(frozen=True)
class Topic:
    topic_id: str
    documents: tuple[Document, ...]


@dataclass(frozen=True)
class Corpus:
    """Validated, immutable span-annotated coreference corpus."""

    name: str
    topics: tuple[Topic, ...]
    split_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        _validate(self)

    # -- lookups ---------------------------------------------------------

    @cached_property
    def _mention_index(self) -> dict[str, Mention]:
        return {m.mention_id: m for m in self.iter_mentions()}

    @cached_property
    def _doc_index(self) -> dict[str, Document]:
        return {d.doc_id: d for t in self.topics for d in t.documents}

    @cached_property
    def _topic_of_doc(self) -> dict[str, str]:
        return {d.doc_id: t.topic_id for t in self.topics for d in t.documents}

    def iter_mentions(self) -> Iterator[Mention]:
        for topic in self.topics:
            for doc in topic.documents:
                yield from doc.mentions

    def mention(self, mention_id: str) -> Mention:
        try:
            return self._mention_index[mention_id]
        except KeyError:
            raise NotFoundError(f"unknown mention id: {mention_id}") from None

    def document(self, doc_id: str) -> Document:
        try:
            return self._doc_index[doc_id]
        except KeyError:
            raise NotFoundError(f"unknown document id: {doc_id}") from None

    def topic_of(self, mention_or_doc_id: str) -> str:
        doc_id = mention_or_doc_id
        if mention_or_doc_id in self._mention_index:
            doc_id = self._mention_index[mention_or_doc_id].doc_id
        try:
            return self._topic_of_doc[doc_id]
        except KeyError:
            raise NotFoundError(f"unknown document id: {doc_id}") from None

    def sentence_of(self, mention: Mention) -> Sentence:
        return self.document(mention.doc_id).sentences[mention.sentence_index]

    def split_of(self, mention_id: str) -> str:
        try:
            return self.split_map[mention_id]
        except KeyError:
            raise NotFoundError(f"mention has no split label: {mention_id}") from None

    def mentions_in_split(self, split: str) -> tuple[Mention, ...]:
        if split not in SPLITS:
            raise ValidationError(f"unknown split: {split!r} (expected one of {SPLITS})")
        return tuple(m for m in self.iter_mentions() if self.split_map[m.mention_id] == split)

    def gold_clusters(self, split: Optional[str] = None) -> dict[str, set[str]]:
        """Gold partition as cluster id -> set of mention ids."""
        mentions = self.mentions_in_split(split) if split else tuple(self.iter_mentions())
        clusters: dict[str, set[str]] = {}
        for m in mentions:
            clusters.setdefault(m.gold_cluster_id, set()).add(m.mention_id)
        return clusters

    def split_counts(self) -> dict[str, dict[str, int]]:
        """Per-split topic/document/mention counts (for ingest reporting)."""
        out = {s: {"topics": set(), "documents": set(), "mentions": 0} for s in SPLITS}
        for m in self.iter_mentions():
            split = self.split_map[m.mention_id]
            out[split]["mentions"] += 1
            out[split]["documents"].add(m.doc_id)
            out[split]["topics"].add(self._topic_of_doc[m.doc_id])
        return {
            s: {"topics": len(v["topics"]), "documents": len(v["documents"]),
                "mentions": v["mentions"]}
            for s, v in out.items()
        }


def _validate(corpus: Corpus) -> None:
    seen_mentions: dict[str, str] = {}  # mention id -> topic id
    cluster_topics: dict[str, str] = {}
    seen_docs_global: dict[str, str] = {}

    for topic in corpus.topics:
        seen_docs: set[str] = set()
        for doc in topic.documents:
            if doc.doc_id in seen_docs:
                raise ValidationError(
                    f"duplicate document id {doc.doc_id!r} in topic {topic.topic_id!r}")
            seen_docs.add(doc.doc_id)
            if doc.doc_id in seen_docs_global:
                raise ValidationError(f"document id {doc.doc_id!r} appears in multiple topics")
            seen_docs_global[doc.doc_id] = topic.topic_id

            for pos, sent in enumerate(doc.sentences):
                if sent.index != pos:
                    raise ValidationError(
                        f"doc {doc.doc_id!r}: sentence indices not contiguous from 0 "
                        f"(position {pos} has index {sent.index})")
                for tok in sent.tokens:
                    if not tok.text:
                        raise ValidationError(
                            f"doc {doc.doc_id!r} sentence {sent.index}: empty token text")

            for m in doc.mentions:
                if m.mention_id in seen_mentions:
                    raise ValidationError(f"duplicate mention id: {m.mention_id!r}")
                seen_mentions[m.mention_id] = topic.topic_id
                if m.doc_id != doc.doc_id:
                    raise ValidationError(
                        f"mention {m.mention_id!r}: doc_id {m.doc_id!r} does not match "
                        f"containing document {doc.doc_id!r}")
                if not (0 <= m.sentence_index < len(doc.sentences)):
                    raise ValidationError(
                        f"mention {m.mention_id!r}: sentence index {m.sentence_index} "
                        f"out of range")
                sent = doc.sentences[m.sentence_index]
                if not (0 <= m.token_start < m.token_end_exclusive <= len(sent.tokens)):
                    raise ValidationError(
                        f"mention {m.mention_id!r}: token span "
                        f"[{m.token_start}, {m.token_end_exclusive}) out of bounds "
                        f"for sentence of {len(sent.tokens)} tokens")
                span_text = " ".join(
                    t.text for t in sent.tokens[m.token_start:m.token_end_exclusive])
                if m.trigger_text != span_text:
                    raise ValidationError(
                        f"mention {m.mention_id!r}: trigger_text {m.trigger_text!r} "
                        f"does not equal span text {span_text!r}")
                if not m.gold_cluster_id:
                    raise ValidationError(f"mention {m.mention_id!r}: empty gold cluster id")
                prev_topic = cluster_topics.setdefault(m.gold_cluster_id, topic.topic_id)
                if prev_topic != topic.topic_id:
                    raise ValidationError(
                        f"cluster {m.gold_cluster_id!r} spans topics "
                        f"{prev_topic!r} and {topic.topic_id!r}")

    labeled = set(corpus.split_map)
    mention_ids = set(seen_mentions)
    if labeled != mention_ids:
        missing = sorted(mention_ids - labeled)[:5]
        extra = sorted(labeled - mention_ids)[:5]
        raise ValidationError(
            f"split map does not partition the mention set "
            f"(unlabeled: {missing}, unknown: {extra})")
    for mid, split in corpus.split_map.items():
        if split not in SPLITS:
            raise ValidationError(f"mention {mid!r}: unknown split label {split!r}")


def mention_lemma(corpus: Corpus, mention_id: str) -> str:
    """Lowercased lemma of the head token of a mention's trigger span.

    The head of a multi-token span is its last non-stopword token (all
    stopwords: the last token). Without a lemma annotation the lowercased
    token text is used.
    """
    m = corpus.mention(mention_id)
    sent = corpus.sentence_of(m)
    span = sent.tokens[m.token_start:m.token_end_exclusive]
    head = span[-1]
    for tok in reversed(span):
        if not tok.is_stopword:
            head = tok
            break
    return (head.lemma if head.lemma else head.text).lower()


# -- canonical JSONL format ----------------------------------------------


def export_corpus(corpus: Corpus, path: str) -> None:
    """Write the canonical line-delimited corpus file (round-trip safe)."""
    with open(path, "w", encoding="utf-8") as fh:
        _write_record(fh, {"kind": "meta", "name": corpus.name,
                           "split_map": corpus.split_map})
        for topic in corpus.topics:
            _write_record(fh, {"kind": "topic", "topic_id": topic.topic_id})
            for doc in topic.documents:
                _write_record(fh, {"kind": "document", "topic_id": topic.topic_id,
                                   "doc_id": doc.doc_id})
                for sent in doc.sentences:
                    _write_record(fh, {
                        "kind": "sentence", "doc_id": doc.doc_id, "index": sent.index,
                        "tokens": [{"text": t.text, "lemma": t.lemma,
                                    "is_stopword": t.is_stopword} for t in sent.tokens],
                    })
                for m in doc.mentions:
                    _write_record(fh, {
                        "kind": "mention", "mention_id": m.mention_id,
                        "doc_id": m.doc_id, "sentence_index": m.sentence_index,
                        "token_start": m.token_start,
                        "token_end_exclusive": m.token_end_exclusive,
                        "trigger_text": m.trigger_text,
                        "gold_cluster_id": m.gold_cluster_id,
                    })


def _write_record(fh, record: dict) -> None:
    fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def ingest_corpus(path: str, fmt: str = "canonical", **kwargs) -> Corpus:
    """Load and validate a corpus file.

    ``fmt`` selects the parser: "canonical" (JSON lines) or "ecb-xml"
    (directory of ECB+-style XML topic folders; extra keyword arguments
    are forwarded to :func:`ingest_ecb_xml`).
    """
    if fmt == "canonical":
        return _ingest_canonical(path)
    if fmt == "ecb-xml":
        return ingest_ecb_xml(path, **kwargs)
    raise ValidationError(f"unknown corpus format: {fmt!r}")


def _ingest_canonical(path: str) -> Corpus:
    name = None
    split_map: dict[str, str] = {}
    topic_order: list[str] = []
    docs_by_topic: dict[str, list[str]] = {}
    doc_topic: dict[str, str] = {}
    doc_order: list[str] = []
    sentences: dict[str, list[Sentence]] = {}
    mentions: dict[str, list[Mention]] = {}

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON record: {exc.msg}", path, lineno) from None
            kind = rec.get("kind")
            try:
                if kind == "meta":
                    name = rec["name"]
                    split_map = dict(rec["split_map"])
                elif kind == "topic":
                    tid = rec["topic_id"]
                    if tid in docs_by_topic:
                        raise ParseError(f"duplicate topic record: {tid!r}", path, lineno)
                    topic_order.append(tid)
                    docs_by_topic[tid] = []
                elif kind == "document":
                    tid, did = rec["topic_id"], rec["doc_id"]
                    if tid not in docs_by_topic:
                        raise ParseError(
                            f"document {did!r} references undeclared topic {tid!r}",
                            path, lineno)
                    docs_by_topic[tid].append(did)
                    doc_topic[did] = tid
                    doc_order.append(did)
                    sentences[did] = []
                    mentions[did] = []
                elif kind == "sentence":
                    did = rec["doc_id"]
                    if did not in sentences:
                        raise ParseError(
                            f"sentence references undeclared document {did!r}", path, lineno)
                    toks = tuple(
                        Token(text=t["text"], lemma=t.get("lemma"),
                              is_stopword=bool(t.get("is_stopword", False)))
                        for t in rec["tokens"])
                    sentences[did].append(Sentence(index=int(rec["index"]), tokens=toks))
                elif kind == "mention":
                    did = rec["doc_id"]
                    if did not in mentions:
                        raise ParseError(
                            f"mention references undeclared document {did!r}", path, lineno)
                    mentions[did].append(Mention(
                        mention_id=rec["mention_id"], doc_id=did,
                        sentence_index=int(rec["sentence_index"]),
                        token_start=int(rec["token_start"]),
                        token_end_exclusive=int(rec["token_end_exclusive"]),
                        trigger_text=rec["trigger_text"],
                        gold_cluster_id=rec["gold_cluster_id"]))
                else:
                    raise ParseError(f"unknown record kind: {kind!r}", path, lineno)
            except KeyError as exc:
                raise ParseError(f"record missing field {exc}", path, lineno) from None

    if name is None:
        if topic_order or split_map:
            raise ParseError("missing meta record", path)
        name = os.path.splitext(os.path.basename(path))[0]

    topics = tuple(
        Topic(topic_id=tid, documents=tuple(
            Document(doc_id=did, sentences=tuple(sentences[did]),
                     mentions=tuple(mentions[did]))
            for did in docs_by_topic[tid]))
        for tid in topic_order)
    return Corpus(name=name, topics=topics, split_map=split_map)


# -- ECB+ XML import adapter ----------------------------------------------

DEFAULT_DEV_TOPICS = ("2", "5", "12", "18", "21", "34", "35")
DEFAULT_TEST_TOPICS = tuple(str(t) for t in range(36, 46))


def ingest_ecb_xml(root_dir: str, name: str = "ecbplus",
                   dev_topics=DEFAULT_DEV_TOPICS,
                   test_topics=DEFAULT_TEST_TOPICS,
                   dev_small_docs=(),
                   sentence_filter: Optional[dict] = None) -> Corpus:
    """Import an ECB+-style XML directory tree.

    Expects ``root_dir/<topic>/<doc>.xml`` files with ``<token>`` elements
    and ``ACTION*``/``NEG_ACTION*`` markables anchored via
    ``<token_anchor>``; ``CROSS_DOC_COREF``/``INTRA_DOC_COREF`` relations
    supply gold chain ids (unlinked event markables become singletons).

    ``sentence_filter`` optionally maps doc_id -> set of sentence indices
    to keep (the usual "validated sentences" restriction). Splits are
    assigned by topic; docs listed in ``dev_small_docs`` move from dev to
    dev_small.
    """
    dev_topics = set(dev_topics)
    test_topics = set(test_topics)
    dev_small_docs = set(dev_small_docs)

    topics = []
    split_map: dict[str, str] = {}
    topic_ids = sorted(
        (d for d in os.listdir(root_dir) if os.path.isdir(os.path.join(root_dir, d))),
        key=lambda t: (len(t), t))
    for tid in topic_ids:
        tdir = os.path.join(root_dir, tid)
        documents = []
        for fname in sorted(os.listdir(tdir)):
            if not fname.endswith(".xml"):
                continue
            doc_path = os.path.join(tdir, fname)
            doc_id = fname[:-4]
            keep = None
            if sentence_filter is not None:
                keep = sentence_filter.get(doc_id, set())
            doc = _parse_ecb_document(doc_path, doc_id, keep)
            documents.append(doc)
        if not documents:
            continue
        topics.append(Topic(topic_id=tid, documents=tuple(documents)))

        if tid in test_topics:
            split = "test"
        elif tid in dev_topics:
            split = "dev"
        else:
            split = "train"
        for doc in topics[-1].documents:
            doc_split = split
            if split == "dev" and doc.doc_id in dev_small_docs:
                doc_split = "dev_small"
            for m in doc.mentions:
                split_map[m.mention_id] = doc_split

    return Corpus(name=name, topics=tuple(topics), split_map=split_map)


def _parse_ecb_document(path: str, doc_id: str, keep_sentences) -> Document:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise ParseError(f"invalid XML: {exc}", path) from None
    root = tree.getroot()

    # token t_id -> (sentence index, position, text)
    tok_info: dict[str, tuple[int, int, str]] = {}
    sent_tokens: dict[int, list[tuple[int, str]]] = {}
    for tok in root.iter("token"):
        t_id = tok.get("t_id")
        sent = int(tok.get("sentence"))
        num = int(tok.get("number"))
        text = tok.text or ""
        if not text.strip():
            text = text or "_"
        tok_info[t_id] = (sent, num, text)
        sent_tokens.setdefault(sent, []).append((num, text))

    if keep_sentences is not None:
        sent_tokens = {s: toks for s, toks in sent_tokens.items() if s in keep_sentences}

    # reindex kept sentences contiguously from 0, preserving order
    sent_order = sorted(sent_tokens)
    sent_remap = {orig: i for i, orig in enumerate(sent_order)}
    sentences = []
    for orig in sent_order:
        toks = tuple(Token(text=text)
                     for _, text in sorted(sent_tokens[orig], key=lambda p: p[0]))
        sentences.append(Sentence(index=sent_remap[orig], tokens=toks))

    markables = root.find("Markables")
    relations = root.find("Relations")

    # relation target markables carry the chain identity
    instance_ids: dict[str, str] = {}
    if markables is not None:
        for mk in markables:
            iid = mk.get("instance_id") or mk.get("TAG_DESCRIPTOR")
            if iid and len(list(mk)) == 0:
                instance_ids[mk.get("m_id")] = iid

    chain_of: dict[str, str] = {}
    if relations is not None:
        for rel in relations:
            target = rel.find("target")
            note = rel.get("note")
            if target is not None:
                chain = instance_ids.get(target.get("m_id")) or note
            else:
                chain = note
            if not chain:
                chain = f"{rel.tag}_{doc_id}_{rel.get('r_id')}"
            if rel.tag == "INTRA_DOC_COREF":
                chain = f"INTRA_{doc_id}_{chain}"
            for src in rel.findall("source"):
                chain_of[src.get("m_id")] = chain

    mentions = []
    if markables is not None:
        for mk in markables:
            if not (mk.tag.startswith("ACTION") or mk.tag.startswith("NEG_ACTION")):
                continue
            anchors = [a.get("t_id") for a in mk.findall("token_anchor")]
            if not anchors:
                continue  # abstract instance markable
            infos = [tok_info[a] for a in anchors if a in tok_info]
            if not infos:
                continue
            sents = {i[0] for i in infos}
            if len(sents) != 1:
                raise ParseError(
                    f"markable {mk.get('m_id')!r} spans multiple sentences", path)
            orig_sent = sents.pop()
            if keep_sentences is not None and orig_sent not in sent_remap:
                continue
            positions = sorted(i[1] for i in infos)
            start, end = positions[0], positions[-1] + 1
            sent_idx = sent_remap[orig_sent]
            sent = sentences[sent_idx]
            m_id = mk.get("m_id")
            mention_id = f"{doc_id}_{m_id}"
            cluster = chain_of.get(m_id, f"SINGLETON_{doc_id}_{m_id}")
            mentions.append(Mention(
                mention_id=mention_id, doc_id=doc_id, sentence_index=sent_idx,
                token_start=start, token_end_exclusive=end,
                trigger_text=" ".join(t.text for t in sent.tokens[start:end]),
                gold_cluster_id=cluster))

    return Document(doc_id=doc_id, sentences=tuple(sentences), mentions=tuple(mentions))
