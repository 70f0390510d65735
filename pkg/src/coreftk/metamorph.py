"""Constrained metaphoric paraphrasing and trigger realignment.

A chat model rewrites corpus sentences so that only the event triggers
change (into single-word or multi-word metaphors); the original trigger
positions are then re-located in the rewritten sentences so the gold
coreference annotations carry over unchanged. Occurrence ambiguities and
misses are surfaced as review cases instead of silently guessed.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from .corpus import Corpus, Document, Mention, Sentence, Token, Topic
from .errors import ConflictError, ParseError, ValidationError
from .llm import ChatClient, LlmConfig
from .prompts import render_metaphor_prompt

MODES = ("single-word", "multi-word")
VERSIONS = ("META_1", "META_m")

AUTO_ALIGNED = "auto_aligned"
AMBIGUOUS = "ambiguous"
MISSING = "missing"
CORRECTED = "corrected"
CASE_STATUSES = (AUTO_ALIGNED, AMBIGUOUS, MISSING, CORRECTED)

_REPLY_KEYS = ("Original Sentence", "Original Word List",
               "Metaphoric Word List", "Metaphoric Sentence")


@dataclass(frozen=True)
class MetamorphConfig:
    mode: str
    llm: LlmConfig
    candidates_per_trigger: int = 5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown paraphrase mode: {self.mode!r}")
        if self.candidates_per_trigger < 1:
            raise ValidationError("candidates_per_trigger must be >= 1")


@dataclass(frozen=True)
class ParaphraseRecord:
    doc_id: str
    sentence_index: int
    original_sentence: str
    original_word_list: tuple[str, ...]
    metaphoric_word_list: tuple[str, ...]
    metaphoric_sentence: str
    mode: str
    raw_response: str
    prompt_hash: str = ""
    status: str = "ok"  # ok | failed

    def __post_init__(self):
        if len(self.original_word_list) != len(self.metaphoric_word_list):
            raise ValidationError(
                f"{self.doc_id}/{self.sentence_index}: word lists differ in length")


@dataclass(frozen=True)
class AlignmentCase:
    mention_id: str
    doc_id: str
    sentence_index: int
    phrase: str
    status: str
    candidate_span: Optional[tuple[int, int]] = None
    correction: Optional[tuple[int, int]] = None
    reviewer: Optional[str] = None
    timestamp: Optional[float] = None

    def __post_init__(self):
        if self.status not in CASE_STATUSES:
            raise ValidationError(f"unknown case status: {self.status!r}")
        if self.status == AUTO_ALIGNED and self.candidate_span is None:
            raise ValidationError(
                f"case {self.mention_id}: auto_aligned without a candidate span")
        if self.status == CORRECTED and self.correction is None:
            raise ValidationError(
                f"case {self.mention_id}: corrected without a correction span")

    @property
    def resolved_span(self) -> Optional[tuple[int, int]]:
        if self.status == CORRECTED:
            return self.correction
        if self.status == AUTO_ALIGNED:
            return self.candidate_span
        return None


def render_prompt(sentence: str, triggers: list[str],
                  config: MetamorphConfig) -> tuple[str, str, str]:
    """(system, user, template hash) for one sentence transformation."""
    return render_metaphor_prompt(sentence, triggers, config.mode,
                                  config.candidates_per_trigger)


def _strip_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\s*", "", text)
        text = re.sub(r"\s*```$", "", text)
    return text.strip()


def _parse_reply(raw: str, expected_triggers: list[str]) -> dict:
    """Parse and validate the 4-field JSON reply; raises ValidationError."""
    try:
        body = json.loads(_strip_fences(raw))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"reply is not valid JSON: {exc.msg}") from None
    if not isinstance(body, dict):
        raise ValidationError("reply JSON is not an object")
    for key in _REPLY_KEYS:
        if key not in body:
            raise ValidationError(f"reply JSON missing field {key!r}")
    original_list = body["Original Word List"]
    metaphoric_list = body["Metaphoric Word List"]
    if not (isinstance(original_list, list) and isinstance(metaphoric_list, list)):
        raise ValidationError("word list fields must be JSON arrays")
    if len(original_list) != len(metaphoric_list):
        raise ValidationError(
            f"word lists differ in length: {len(original_list)} vs "
            f"{len(metaphoric_list)}")
    if [str(w) for w in original_list] != list(expected_triggers):
        raise ValidationError(
            f"original word list {original_list!r} does not match corpus "
            f"triggers {expected_triggers!r}")
    if not isinstance(body["Metaphoric Sentence"], str) or not body["Metaphoric Sentence"]:
        raise ValidationError("metaphoric sentence missing or empty")
    return body


def sentence_mentions(corpus: Corpus, doc_id: str, sentence_index: int) -> list[Mention]:
    """Mentions of one sentence in trigger occurrence (token start) order."""
    doc = corpus.document(doc_id)
    found = [m for m in doc.mentions if m.sentence_index == sentence_index]
    return sorted(found, key=lambda m: m.token_start)


def transform_sentence(corpus: Corpus, doc_id: str, sentence_index: int,
                       config: MetamorphConfig, client: ChatClient) -> ParaphraseRecord:
    """Paraphrase one sentence, retrying on contract violations.

    After ``llm.max_retries`` retries the record comes back with status
    "failed" and the sentence kept literal; corpus state is never touched.
    """
    mentions = sentence_mentions(corpus, doc_id, sentence_index)
    if not mentions:
        raise ValidationError(f"{doc_id}/{sentence_index}: sentence has no mentions")
    sentence = corpus.document(doc_id).sentences[sentence_index].text
    triggers = [m.trigger_text for m in mentions]
    system, user, prompt_hash = render_prompt(sentence, triggers, config)

    raw = ""
    for _ in range(config.llm.max_retries + 1):
        raw = client.complete(system, user)
        try:
            body = _parse_reply(raw, triggers)
        except ValidationError:
            continue
        return ParaphraseRecord(
            doc_id=doc_id, sentence_index=sentence_index,
            original_sentence=sentence,
            original_word_list=tuple(triggers),
            metaphoric_word_list=tuple(str(w) for w in body["Metaphoric Word List"]),
            metaphoric_sentence=body["Metaphoric Sentence"],
            mode=config.mode, raw_response=raw, prompt_hash=prompt_hash)

    return ParaphraseRecord(
        doc_id=doc_id, sentence_index=sentence_index,
        original_sentence=sentence,
        original_word_list=tuple(triggers),
        metaphoric_word_list=tuple(triggers),
        metaphoric_sentence=sentence,
        mode=config.mode, raw_response=raw, prompt_hash=prompt_hash,
        status="failed")


def transform_split(corpus: Corpus, split: str, config: MetamorphConfig,
                    client: ChatClient) -> list[ParaphraseRecord]:
    """Transform every mention-bearing sentence of a split; record order is
    deterministic (doc id, sentence index) regardless of request concurrency."""
    targets = sorted({(m.doc_id, m.sentence_index)
                      for m in corpus.mentions_in_split(split)})
    with ThreadPoolExecutor(max_workers=config.llm.max_in_flight) as pool:
        records = list(pool.map(
            lambda t: transform_sentence(corpus, t[0], t[1], config, client), targets))
    return records


# -- trigger realignment ------------------------------------------------------


def _occurrences(haystack: str, needle: str) -> list[tuple[int, int]]:
    """All case-insensitive occurrence spans, in left-to-right order."""
    hs = haystack.lower()
    nd = needle.lower()
    if not nd:
        return []
    spans = []
    start = 0
    while True:
        idx = hs.find(nd, start)
        if idx < 0:
            break
        spans.append((idx, idx + len(nd)))
        start = idx + 1
    return spans


def _token_spans(sentence: str) -> list[tuple[int, int]]:
    return [(m.start(), m.end()) for m in re.finditer(r"\S+", sentence)]


def _on_token_boundaries(span: tuple[int, int], token_spans) -> bool:
    starts = {s for s, _ in token_spans}
    ends = {e for _, e in token_spans}
    return span[0] in starts and span[1] in ends


def align_triggers(record: ParaphraseRecord,
                   mentions: list[Mention]) -> list[AlignmentCase]:
    """Locate each mention's metaphoric phrase in the rewritten sentence.

    The k-th mention corresponds to the k-th metaphoric phrase. Scanning
    in list order, each phrase takes the leftmost occurrence not consumed
    by an earlier alignment. The choice counts as forced (auto_aligned)
    when the unconsumed occurrences are no more than the triggers still
    demanding this phrase - e.g. two triggers both mapped to "struck"
    with exactly two occurrences pair up first-to-first, second-to-second.
    Extra occurrences leave a real choice, so the case is flagged
    ambiguous (with the leftmost as candidate); zero occurrences is
    missing. A phrase found mid-token (stray punctuation glued on) is
    also flagged ambiguous, because the span needs outward rounding that
    a human should confirm.
    """
    if len(mentions) != len(record.original_word_list):
        raise ValidationError(
            f"{record.doc_id}/{record.sentence_index}: {len(mentions)} mentions "
            f"vs {len(record.original_word_list)} triggers in the record")
    sentence = record.metaphoric_sentence
    token_spans = _token_spans(sentence)
    phrases = [p.lower() for p in record.metaphoric_word_list]
    consumed: list[tuple[int, int]] = []
    cases = []
    for k, mention in enumerate(mentions):
        phrase = record.metaphoric_word_list[k]
        unconsumed = [
            span for span in _occurrences(sentence, phrase)
            if all(span[1] <= s or span[0] >= e for s, e in consumed)]
        if not unconsumed:
            cases.append(AlignmentCase(
                mention_id=mention.mention_id, doc_id=record.doc_id,
                sentence_index=record.sentence_index, phrase=phrase,
                status=MISSING))
            continue
        demand = sum(1 for p in phrases[k:] if p == phrases[k])
        candidate = unconsumed[0]
        consumed.append(candidate)
        forced = len(unconsumed) <= demand
        clean = _on_token_boundaries(candidate, token_spans)
        status = AUTO_ALIGNED if (forced and clean) else AMBIGUOUS
        cases.append(AlignmentCase(
            mention_id=mention.mention_id, doc_id=record.doc_id,
            sentence_index=record.sentence_index, phrase=phrase,
            status=status, candidate_span=candidate))
    return cases


def align_records(corpus: Corpus, records: list[ParaphraseRecord]) -> list[AlignmentCase]:
    cases = []
    for record in records:
        mentions = sentence_mentions(corpus, record.doc_id, record.sentence_index)
        cases.extend(align_triggers(record, mentions))
    return cases


# -- corpus reconstruction ----------------------------------------------------


def _char_to_token_span(span: tuple[int, int], token_spans) -> tuple[int, int]:
    """Outward rounding of a character span to whole whitespace tokens."""
    start_idx = None
    end_idx = None
    for i, (ts, te) in enumerate(token_spans):
        if te > span[0] and ts < span[1]:
            if start_idx is None:
                start_idx = i
            end_idx = i
    if start_idx is None:
        raise ValidationError(f"span {span} covers no tokens")
    return start_idx, end_idx + 1


def build_meta_corpus(corpus: Corpus, records: list[ParaphraseRecord],
                      cases: list[AlignmentCase], version: str) -> Corpus:
    """New corpus with rewritten sentences and identical annotations.

    Refuses (listing the blocking mention ids) while any mention of a
    transformed sentence lacks a resolved case. Mention ids, gold cluster
    ids, splits, and topic structure all carry over; only sentence tokens
    and trigger spans change.
    """
    if version not in VERSIONS:
        raise ValidationError(f"unknown corpus version tag: {version!r}")
    record_by_sentence = {}
    for r in records:
        key = (r.doc_id, r.sentence_index)
        if key in record_by_sentence:
            raise ValidationError(f"duplicate record for sentence {key}")
        record_by_sentence[key] = r
    case_by_mention = {c.mention_id: c for c in cases}

    blocking = []
    for r in records:
        for m in sentence_mentions(corpus, r.doc_id, r.sentence_index):
            case = case_by_mention.get(m.mention_id)
            if case is None or case.resolved_span is None:
                blocking.append(m.mention_id)
    if blocking:
        raise ConflictError(
            "unresolved alignment cases block the build: " + ", ".join(sorted(blocking)))

    topics = []
    for topic in corpus.topics:
        documents = []
        for doc in topic.documents:
            new_sentences = list(doc.sentences)
            new_mentions = []
            token_spans_cache: dict[int, list[tuple[int, int]]] = {}
            for sent in doc.sentences:
                record = record_by_sentence.get((doc.doc_id, sent.index))
                if record is None:
                    continue
                tokens = tuple(Token(text=t) for t in record.metaphoric_sentence.split())
                new_sentences[sent.index] = Sentence(index=sent.index, tokens=tokens)
                token_spans_cache[sent.index] = _token_spans(record.metaphoric_sentence)
            for m in doc.mentions:
                if (doc.doc_id, m.sentence_index) not in record_by_sentence:
                    new_mentions.append(m)
                    continue
                case = case_by_mention[m.mention_id]
                token_spans = token_spans_cache[m.sentence_index]
                start, end = _char_to_token_span(case.resolved_span, token_spans)
                sent_tokens = new_sentences[m.sentence_index].tokens
                new_mentions.append(replace(
                    m, token_start=start, token_end_exclusive=end,
                    trigger_text=" ".join(t.text for t in sent_tokens[start:end])))
            documents.append(Document(doc_id=doc.doc_id,
                                      sentences=tuple(new_sentences),
                                      mentions=tuple(new_mentions)))
        topics.append(Topic(topic_id=topic.topic_id, documents=tuple(documents)))

    return Corpus(name=f"{corpus.name}_{version}", topics=tuple(topics),
                  split_map=dict(corpus.split_map))


# -- record / case persistence (append-only JSONL) ----------------------------


def save_records(records: list[ParaphraseRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "doc_id": r.doc_id, "sentence_index": r.sentence_index,
                "original_sentence": r.original_sentence,
                "original_word_list": list(r.original_word_list),
                "metaphoric_word_list": list(r.metaphoric_word_list),
                "metaphoric_sentence": r.metaphoric_sentence,
                "mode": r.mode, "raw_response": r.raw_response,
                "prompt_hash": r.prompt_hash, "status": r.status,
            }, ensure_ascii=False) + "\n")


def load_records(path: str) -> list[ParaphraseRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                records.append(ParaphraseRecord(
                    doc_id=raw["doc_id"], sentence_index=int(raw["sentence_index"]),
                    original_sentence=raw["original_sentence"],
                    original_word_list=tuple(raw["original_word_list"]),
                    metaphoric_word_list=tuple(raw["metaphoric_word_list"]),
                    metaphoric_sentence=raw["metaphoric_sentence"],
                    mode=raw["mode"], raw_response=raw.get("raw_response", ""),
                    prompt_hash=raw.get("prompt_hash", ""),
                    status=raw.get("status", "ok")))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"bad paraphrase record: {exc}", path, lineno) from None
    return records


def case_to_dict(case: AlignmentCase) -> dict:
    return {
        "mention_id": case.mention_id, "doc_id": case.doc_id,
        "sentence_index": case.sentence_index, "phrase": case.phrase,
        "status": case.status,
        "candidate_span": list(case.candidate_span) if case.candidate_span else None,
        "correction": list(case.correction) if case.correction else None,
        "reviewer": case.reviewer, "timestamp": case.timestamp,
    }


def case_from_dict(raw: dict) -> AlignmentCase:
    return AlignmentCase(
        mention_id=raw["mention_id"], doc_id=raw["doc_id"],
        sentence_index=int(raw["sentence_index"]), phrase=raw["phrase"],
        status=raw["status"],
        candidate_span=tuple(raw["candidate_span"]) if raw.get("candidate_span") else None,
        correction=tuple(raw["correction"]) if raw.get("correction") else None,
        reviewer=raw.get("reviewer"), timestamp=raw.get("timestamp"))


def save_cases(cases: list[AlignmentCase], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in cases:
            fh.write(json.dumps(case_to_dict(c), ensure_ascii=False) + "\n")


def load_cases(path: str) -> list[AlignmentCase]:
    cases = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                cases.append(case_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"bad alignment case: {exc}", path, lineno) from None
    return cases
