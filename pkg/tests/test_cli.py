"""CLI wiring: pipelines compose through files, manifests, exit codes."""

import json
import os

import pytest

from coreftk.cli import main
from coreftk.corpus import export_corpus
from coreftk.filters import EmbeddingTable, load_pairs

from conftest import (build_pipeline_corpus, external_scores_for,
                      make_mention, make_sentence, pipeline_embeddings)

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture
def workdir(tmp_path):
    corpus = build_pipeline_corpus()
    corpus_path = str(tmp_path / "corpus.jsonl")
    export_corpus(corpus, corpus_path)
    return tmp_path, corpus, corpus_path


def run(args):
    code = main(list(args))
    assert code == 0, f"command failed ({code}): {args}"


def golden(name):
    with open(os.path.join(GOLDEN_DIR, name), "rb") as fh:
        return fh.read()


class TestGoldenPipelines:
    def test_lh_lexical_cc_evaluate(self, workdir):
        tmp, corpus, corpus_path = workdir
        pairs = str(tmp / "pairs.tsv")
        scores = str(tmp / "scores.tsv")
        assign = str(tmp / "assign.tsv")
        report = str(tmp / "report.txt")
        run(["filter", "lh", corpus_path, "--split", "test", "--out", pairs])
        run(["score", "lexical", "--pairs", pairs, "--out", scores])
        run(["cluster", "cc", corpus_path, "--split", "test", "--scores", scores,
             "--link-threshold", "0.5", "--out", assign])
        run(["evaluate", "--gold", corpus_path, "--split", "test",
             "--pred", assign, "--out", report])
        with open(report, "rb") as fh:
            assert fh.read() == golden("report_lh_cc.txt")

    def test_knn_external_agglo_evaluate(self, workdir):
        tmp, corpus, corpus_path = workdir
        emb = str(tmp / "emb.tsv")
        EmbeddingTable(pipeline_embeddings(corpus)).save(emb)
        pairs = str(tmp / "pairs.tsv")
        raw = str(tmp / "raw.tsv")
        scores = str(tmp / "scores.tsv")
        assign = str(tmp / "assign.tsv")
        report = str(tmp / "report.txt")
        run(["filter", "knn", corpus_path, "--split", "test", "--k", "3",
             "--embeddings", emb, "--out", pairs])
        with open(raw, "w") as fh:
            fh.write(external_scores_for(corpus, load_pairs(pairs)))
        run(["score", "external", "--scores", raw, "--corpus", corpus_path,
             "--out", scores])
        run(["cluster", "agglo", corpus_path, "--split", "test",
             "--scores", scores, "--tau", "0.5", "--linkage", "average",
             "--out", assign])
        run(["evaluate", "--gold", corpus_path, "--split", "test",
             "--pred", assign, "--out", report])
        with open(report, "rb") as fh:
            assert fh.read() == golden("report_knn_agglo.txt")

    def test_rerun_byte_identical(self, workdir):
        tmp, corpus, corpus_path = workdir
        outputs = {}
        for attempt in ("one", "two"):
            pairs = str(tmp / f"pairs_{attempt}.tsv")
            scores = str(tmp / f"scores_{attempt}.tsv")
            assign = str(tmp / f"assign_{attempt}.tsv")
            report = str(tmp / f"report_{attempt}.txt")
            run(["filter", "lh", corpus_path, "--split", "test", "--out", pairs])
            run(["score", "lexical", "--pairs", pairs, "--out", scores])
            run(["cluster", "cc", corpus_path, "--split", "test",
                 "--scores", scores, "--out", assign])
            run(["evaluate", "--gold", corpus_path, "--split", "test",
                 "--pred", assign, "--out", report])
            outputs[attempt] = [open(p, "rb").read()
                                for p in (pairs, scores, assign, report)]
        assert outputs["one"] == outputs["two"]


class TestManifests:
    def test_sidecar_written_with_digests(self, workdir):
        tmp, corpus, corpus_path = workdir
        pairs = str(tmp / "pairs.tsv")
        run(["filter", "lh", corpus_path, "--split", "test", "--out", pairs])
        manifest_path = pairs + ".manifest.json"
        assert os.path.exists(manifest_path)
        manifest = json.load(open(manifest_path))
        assert manifest["command"] == "filter lh"
        assert manifest["inputs"]["corpus"]["sha256"]
        assert manifest["outputs"]["pairs"]["sha256"]
        assert manifest["tool_version"]
        assert manifest["params"]["threshold"] == 0.005


class TestOracleRecallCommand:
    def test_five_ninths_case(self, tmp_path):
        from coreftk.corpus import Corpus, Document, Topic

        s = make_sentence(0, "alpha beta gamma")
        mentions = tuple(make_mention(m, "d1", s, i, i + 1, "G")
                         for i, m in enumerate(("a", "b", "c")))
        corpus = Corpus("three", (Topic("1", (Document("d1", (s,), mentions),)),),
                        {"a": "test", "b": "test", "c": "test"})
        corpus_path = str(tmp_path / "three.jsonl")
        export_corpus(corpus, corpus_path)
        retained = str(tmp_path / "retained.tsv")
        with open(retained, "w") as fh:
            fh.write("a\tb\n")
        out = str(tmp_path / "oracle.txt")
        run(["oracle-recall", corpus_path, "--retained", retained,
             "--split", "test", "--out", out])
        assert open(out).read() == "oracle_b3_recall\t0.555556\n"


class TestDiversityCommand:
    def test_report_written(self, workdir):
        tmp, corpus, corpus_path = workdir
        out = str(tmp / "div.tsv")
        run(["diversity", corpus_path, "--split", "test", "--out", out])
        lines = open(out).read().splitlines()
        assert lines[-1].startswith("WEIGHTED\t")
        assert len(lines) == 9  # 8 non-singleton clusters + the aggregate


class TestEvaluatePerfect:
    def test_gold_as_pred_scores_one(self, workdir):
        tmp, corpus, corpus_path = workdir
        assign = str(tmp / "gold_assign.tsv")
        with open(assign, "w") as fh:
            for m in sorted(corpus.mentions_in_split("test"),
                            key=lambda m: m.mention_id):
                fh.write(f"{m.mention_id}\t{m.gold_cluster_id}\n")
        report = str(tmp / "report.txt")
        run(["evaluate", "--gold", corpus_path, "--split", "test",
             "--pred", assign, "--out", report])
        assert "conll_f1\t1.000000" in open(report).read()


class TestIngestCommand:
    def test_counts_printed(self, workdir, capsys):
        tmp, corpus, corpus_path = workdir
        out = str(tmp / "canon.jsonl")
        run(["ingest", corpus_path, "--format", "canonical", "--out", out])
        printed = capsys.readouterr().out
        assert "train" in printed and "mentions=24" in printed
        assert "test" in printed and "mentions=32" in printed


class TestExitCodes:
    def test_usage_error_is_one(self):
        assert main(["filter", "lh", "--definitely-not-a-flag"]) == 1

    def test_unknown_command_is_one(self):
        assert main(["frobnicate"]) == 1

    def test_validation_error_is_two(self, workdir, tmp_path):
        tmp, corpus, corpus_path = workdir
        bad_pred = str(tmp_path / "bad_assign.tsv")
        with open(bad_pred, "w") as fh:
            fh.write("not_a_mention\tc1\n")
        report = str(tmp_path / "report.txt")
        code = main(["evaluate", "--gold", corpus_path, "--split", "test",
                     "--pred", bad_pred, "--out", report])
        assert code == 2

    def test_io_error_is_three(self, workdir):
        tmp, corpus, corpus_path = workdir
        code = main(["filter", "lh", corpus_path, "--split", "test",
                     "--out", str(tmp / "no" / "such" / "dir" / "pairs.tsv")])
        assert code == 3

    def test_parse_error_is_two(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{nope\n")
        code = main(["ingest", str(bad), "--format", "canonical",
                     "--out", str(tmp_path / "out.jsonl")])
        assert code == 2


class TestReviewCommands:
    def test_init_and_export_flow(self, metamorph_fixture, tmp_path):
        import dataclasses

        corpus, records, cases = metamorph_fixture
        from coreftk.metamorph import CORRECTED, save_cases, save_records

        corpus_path = str(tmp_path / "corpus.jsonl")
        export_corpus(corpus, corpus_path)
        records_path = str(tmp_path / "records.jsonl")
        save_records(records, records_path)
        resolved = [dataclasses.replace(c, status=CORRECTED,
                                        correction=c.candidate_span,
                                        reviewer="t", timestamp=1.0)
                    if c.status == "ambiguous" else c for c in cases]
        cases_path = str(tmp_path / "cases.jsonl")
        save_cases(resolved, cases_path)
        store = str(tmp_path / "store")
        run(["review", "init", "--corpus", corpus_path, "--records", records_path,
             "--cases", cases_path, "--store", store])
        out = str(tmp_path / "meta.jsonl")
        run(["export", "--store", store, "--version", "metam", "--out", out])
        from coreftk.corpus import ingest_corpus
        from coreftk.metrics import gold_assignment

        meta = ingest_corpus(out)
        assert gold_assignment(meta).clusters() == gold_assignment(corpus).clusters()

    def test_export_blocked_is_two(self, metamorph_fixture, tmp_path):
        corpus, records, cases = metamorph_fixture
        from coreftk.metamorph import save_cases, save_records

        corpus_path = str(tmp_path / "corpus.jsonl")
        export_corpus(corpus, corpus_path)
        records_path = str(tmp_path / "records.jsonl")
        save_records(records, records_path)
        cases_path = str(tmp_path / "cases.jsonl")
        save_cases(cases, cases_path)  # two ambiguous cases left unresolved
        store = str(tmp_path / "store")
        run(["review", "init", "--corpus", corpus_path, "--records", records_path,
             "--cases", cases_path, "--store", store])
        code = main(["export", "--store", store, "--version", "metam",
                     "--out", str(tmp_path / "meta.jsonl")])
        assert code == 2


class TestAlignCommand:
    def test_align_flow(self, metamorph_fixture, tmp_path, capsys):
        corpus, records, _ = metamorph_fixture
        from coreftk.metamorph import load_cases, save_records

        corpus_path = str(tmp_path / "corpus.jsonl")
        export_corpus(corpus, corpus_path)
        records_path = str(tmp_path / "records.jsonl")
        save_records(records, records_path)
        out = str(tmp_path / "cases.jsonl")
        run(["align", corpus_path, "--records", records_path, "--out", out])
        printed = capsys.readouterr().out
        assert "ambiguous=2" in printed and "auto_aligned=4" in printed
        assert len(load_cases(out)) == 6
