"""Event-sourced store backing the hand-correction service.

A store directory holds the source corpus, the paraphrase records, the
seed alignment cases, and an append-only event log of corrections.
Materialized state is the seed cases with the log replayed on top, so
rebuilding a store from its files always reproduces the same state.
Writes are serialized and flushed to disk before they are acknowledged.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import replace

from ..corpus import Corpus, export_corpus, ingest_corpus
from ..errors import ConflictError, NotFoundError, ValidationError
from ..metamorph import (AMBIGUOUS, CORRECTED, MISSING, AlignmentCase,
                         ParaphraseRecord, build_meta_corpus, case_from_dict,
                         load_cases, load_records, save_cases, save_records)

CORPUS_FILE = "corpus.jsonl"
RECORDS_FILE = "records.jsonl"
CASES_FILE = "cases.jsonl"
EVENTS_FILE = "events.jsonl"

QUEUE_STATUSES = (AMBIGUOUS, MISSING)


def init_store(store_dir: str, corpus: Corpus, records: list[ParaphraseRecord],
               cases: list[AlignmentCase]) -> None:
    """Lay down the store files for a fresh review round."""
    os.makedirs(store_dir, exist_ok=True)
    export_corpus(corpus, os.path.join(store_dir, CORPUS_FILE))
    save_records(records, os.path.join(store_dir, RECORDS_FILE))
    save_cases(cases, os.path.join(store_dir, CASES_FILE))
    events = os.path.join(store_dir, EVENTS_FILE)
    if not os.path.exists(events):
        open(events, "w").close()


class ReviewStore:
    """Materialized review state over the store directory's files."""

    def __init__(self, store_dir: str):
        self.store_dir = store_dir
        self.corpus = ingest_corpus(os.path.join(store_dir, CORPUS_FILE))
        self.records = load_records(os.path.join(store_dir, RECORDS_FILE))
        self._cases: dict[str, AlignmentCase] = {}
        for case in load_cases(os.path.join(store_dir, CASES_FILE)):
            if case.mention_id in self._cases:
                raise ValidationError(f"duplicate case for mention {case.mention_id!r}")
            self._cases[case.mention_id] = case
        self._write_lock = threading.Lock()
        self._events_path = os.path.join(store_dir, EVENTS_FILE)
        self._replay_events()

    def _replay_events(self) -> None:
        if not os.path.exists(self._events_path):
            open(self._events_path, "w").close()
            return
        with open(self._events_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event.get("event") == "correction":
                    self._apply_correction(
                        event["case_id"],
                        (event["char_start"], event["char_end_exclusive"]),
                        event["reviewer"], event["timestamp"])

    def _apply_correction(self, case_id, span, reviewer, timestamp) -> AlignmentCase:
        case = self._cases[case_id]
        updated = replace(case, status=CORRECTED, correction=tuple(span),
                          reviewer=reviewer, timestamp=timestamp)
        self._cases[case_id] = updated
        return updated

    # -- reads -------------------------------------------------------------

    def ordered_cases(self, statuses=None) -> list[AlignmentCase]:
        wanted = set(statuses) if statuses else None
        cases = [c for c in self._cases.values()
                 if wanted is None or c.status in wanted]
        cases.sort(key=lambda c: (c.doc_id, c.sentence_index, c.mention_id))
        return cases

    def list_cases(self, statuses=None, offset: int = 0, limit: int = 50) -> dict:
        """Stable-ordered page of case summaries; default filter is the
        review queue (ambiguous + missing)."""
        if offset < 0 or limit < 1:
            raise ValidationError("offset must be >= 0 and limit >= 1")
        if statuses is None:
            statuses = QUEUE_STATUSES
        for status in statuses:
            if status not in ("auto_aligned", AMBIGUOUS, MISSING, CORRECTED):
                raise ValidationError(f"unknown status filter: {status!r}")
        cases = self.ordered_cases(statuses)
        page = cases[offset:offset + limit]
        return {
            "total": len(cases),
            "offset": offset,
            "cases": [self._summary(c) for c in page],
        }

    def _summary(self, case: AlignmentCase) -> dict:
        record = self._record_for(case)
        snippet = record.metaphoric_sentence
        if len(snippet) > 120:
            snippet = snippet[:117] + "..."
        return {
            "case_id": case.mention_id,
            "mention_id": case.mention_id,
            "doc_id": case.doc_id,
            "sentence_index": case.sentence_index,
            "status": case.status,
            "phrase": case.phrase,
            "snippet": snippet,
        }

    def _record_for(self, case: AlignmentCase) -> ParaphraseRecord:
        for r in self.records:
            if r.doc_id == case.doc_id and r.sentence_index == case.sentence_index:
                return r
        raise NotFoundError(
            f"no paraphrase record for {case.doc_id}/{case.sentence_index}")

    def get_case(self, case_id: str) -> dict:
        """Full payload for the review UI: both sentences, the original
        span, the candidate span, and every occurrence of the phrase."""
        try:
            case = self._cases[case_id]
        except KeyError:
            raise NotFoundError(f"unknown case id: {case_id!r}") from None
        record = self._record_for(case)
        mention = self.corpus.mention(case.mention_id)
        sent = self.corpus.sentence_of(mention)
        original_text = sent.text
        # char span of the original trigger inside the joined sentence text
        prefix = " ".join(t.text for t in sent.tokens[:mention.token_start])
        start = len(prefix) + (1 if prefix else 0)
        original_span = [start, start + len(mention.trigger_text)]

        from ..metamorph import _occurrences  # occurrence listing, same rule

        return {
            "case_id": case.mention_id,
            "mention_id": case.mention_id,
            "doc_id": case.doc_id,
            "sentence_index": case.sentence_index,
            "status": case.status,
            "phrase": case.phrase,
            "original_sentence": original_text,
            "original_span": original_span,
            "metaphoric_sentence": record.metaphoric_sentence,
            "candidate_span": list(case.candidate_span) if case.candidate_span else None,
            "occurrences": [list(s) for s in
                            _occurrences(record.metaphoric_sentence, case.phrase)],
            "correction": list(case.correction) if case.correction else None,
            "reviewer": case.reviewer,
            "timestamp": case.timestamp,
        }

    def blocking_case_ids(self) -> list[str]:
        return [c.mention_id for c in self.ordered_cases(QUEUE_STATUSES)]

    def digest(self) -> str:
        """Hash of the materialized case state (reads must not change it)."""
        import hashlib
        payload = json.dumps([self.get_case(c.mention_id)
                              for c in self.ordered_cases()], sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    # -- writes ------------------------------------------------------------

    def submit_correction(self, case_id: str, span: tuple[int, int],
                          reviewer: str, overwrite: bool = False) -> dict:
        """Mark a case corrected; durable (flushed) before returning.

        Concurrent submissions to one case serialize on the write lock:
        the second writer gets a ConflictError unless it set ``overwrite``.
        """
        with self._write_lock:
            try:
                case = self._cases[case_id]
            except KeyError:
                raise NotFoundError(f"unknown case id: {case_id!r}") from None
            record = self._record_for(case)
            start, end = int(span[0]), int(span[1])
            if not (0 <= start < end <= len(record.metaphoric_sentence)):
                raise ValidationError(
                    f"span [{start}, {end}) out of bounds for sentence of length "
                    f"{len(record.metaphoric_sentence)}")
            if case.status == CORRECTED and not overwrite:
                raise ConflictError(
                    f"case {case_id!r} already corrected by {case.reviewer!r}")
            timestamp = time.time()
            with open(self._events_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "event": "correction", "case_id": case_id,
                    "char_start": start, "char_end_exclusive": end,
                    "reviewer": reviewer, "timestamp": timestamp,
                    "overwrite": overwrite,
                }) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._apply_correction(case_id, (start, end), reviewer, timestamp)
        return self.get_case(case_id)

    # -- export ------------------------------------------------------------

    def export_ready(self, version: str, out_path: str) -> Corpus:
        """Build and write the transformed corpus; refuses while blocked."""
        blocking = self.blocking_case_ids()
        if blocking:
            raise ConflictError(
                "unresolved cases block the export: " + ", ".join(blocking))
        meta = build_meta_corpus(self.corpus, self.records,
                                 list(self._cases.values()), version)
        export_corpus(meta, out_path)
        return meta
