"""Command-line entry point.

Subcommands compose through files only (corpus files, pair lists, score
files, assignment files, reports); every file-producing command writes a
``*.manifest.json`` sidecar with input/output digests.

Exit codes: 0 success, 1 usage, 2 validation, 3 I/O, 4 network.
"""

from __future__ import annotations

import csv
import sys
import time

import click

from . import clustering, diversity, filters, metamorph, metrics, scoring
from .corpus import export_corpus, ingest_corpus
from .errors import (ConflictError, CoreftkError, LlmTransportError,
                     NotFoundError, ParseError, ValidationError)
from .llm import ChatClient, LlmConfig
from .manifest import write_manifest


@click.group()
def cli():
    """Cross-document event coreference toolkit."""


# -- corpus ------------------------------------------------------------------


@cli.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["canonical", "ecb-xml"]),
              default="canonical", show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--name", default=None, help="Corpus name (ecb-xml only).")
@click.option("--dev-topics", default=None,
              help="Comma-separated dev topic ids (ecb-xml only).")
@click.option("--test-topics", default=None,
              help="Comma-separated test topic ids (ecb-xml only).")
@click.option("--dev-small-docs", type=click.Path(exists=True), default=None,
              help="File listing one doc id per line to move from dev to dev_small.")
@click.option("--sentences-csv", type=click.Path(exists=True), default=None,
              help="CSV of topic,file,sentence rows restricting ecb-xml ingestion "
                   "to validated sentences.")
def ingest(path, fmt, out, name, dev_topics, test_topics, dev_small_docs,
           sentences_csv):
    """Ingest a corpus file/directory, validate it, and write the canonical form."""
    started = time.time()
    kwargs = {}
    if fmt == "ecb-xml":
        if name:
            kwargs["name"] = name
        if dev_topics:
            kwargs["dev_topics"] = tuple(t.strip() for t in dev_topics.split(","))
        if test_topics:
            kwargs["test_topics"] = tuple(t.strip() for t in test_topics.split(","))
        if dev_small_docs:
            with open(dev_small_docs, encoding="utf-8") as fh:
                kwargs["dev_small_docs"] = tuple(l.strip() for l in fh if l.strip())
        if sentences_csv:
            keep: dict[str, set[int]] = {}
            with open(sentences_csv, encoding="utf-8", newline="") as fh:
                for row in csv.reader(fh):
                    if not row or not row[-1].strip().isdigit():
                        continue  # header or malformed row
                    doc_id = f"{row[0].strip()}_{row[1].strip()}"
                    keep.setdefault(doc_id, set()).add(int(row[-1].strip()))
            kwargs["sentence_filter"] = keep

    corpus = ingest_corpus(path, fmt, **kwargs)
    export_corpus(corpus, out)
    counts = corpus.split_counts()
    click.echo(f"corpus {corpus.name!r}")
    for split in ("train", "dev", "dev_small", "test"):
        c = counts[split]
        click.echo(f"  {split:<10} topics={c['topics']:<4} "
                   f"documents={c['documents']:<5} mentions={c['mentions']}")
    write_manifest("ingest", {"format": fmt, **{k: str(v) for k, v in kwargs.items()
                                                if k != "sentence_filter"}},
                   {"source": path} if fmt == "canonical" else {},
                   {"corpus": out}, started)


# -- metaphoric transformation -------------------------------------------------


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["single", "multi"]), required=True)
@click.option("--split", type=click.Choice(["dev", "dev_small", "test"]), required=True)
@click.option("--llm-config", "llm_config_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", required=True, type=click.Path())
def transform(corpus_path, mode, split, llm_config_path, out):
    """Metaphorically paraphrase every mention-bearing sentence of a split."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    config = metamorph.MetamorphConfig(
        mode="single-word" if mode == "single" else "multi-word",
        llm=LlmConfig.load(llm_config_path))
    with ChatClient(config.llm) as client:
        records = metamorph.transform_split(corpus, split, config, client)
    metamorph.save_records(records, out)
    failed = sum(1 for r in records if r.status == "failed")
    click.echo(f"transformed {len(records)} sentences ({failed} failed), "
               f"{client.requests_sent} requests")
    write_manifest("transform", {"mode": mode, "split": split},
                   {"corpus": corpus_path, "llm_config": llm_config_path},
                   {"records": out}, started)


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--records", "records_path", type=click.Path(exists=True), required=True)
@click.option("--out", required=True, type=click.Path())
def align(corpus_path, records_path, out):
    """Re-locate original triggers inside the transformed sentences."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    records = metamorph.load_records(records_path)
    cases = metamorph.align_records(corpus, records)
    metamorph.save_cases(cases, out)
    by_status: dict[str, int] = {}
    for c in cases:
        by_status[c.status] = by_status.get(c.status, 0) + 1
    click.echo(" ".join(f"{k}={v}" for k, v in sorted(by_status.items())))
    write_manifest("align", {}, {"corpus": corpus_path, "records": records_path},
                   {"cases": out}, started)


@cli.group()
def review():
    """Human review service over alignment cases."""


@review.command("init")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), required=True)
@click.option("--records", "records_path", type=click.Path(exists=True), required=True)
@click.option("--cases", "cases_path", type=click.Path(exists=True), required=True)
@click.option("--store", "store_dir", type=click.Path(), required=True)
def review_init(corpus_path, records_path, cases_path, store_dir):
    """Assemble a review store directory from pipeline outputs."""
    from .review import init_store

    init_store(store_dir, ingest_corpus(corpus_path),
               metamorph.load_records(records_path),
               metamorph.load_cases(cases_path))
    click.echo(f"store initialized at {store_dir}")


@review.command("serve")
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--port", type=int, default=8700, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Directory with the built review UI bundle.")
def review_serve(store_dir, port, host, ui_dir):
    """Serve the review API (and UI bundle, if built)."""
    from .review import serve

    serve(store_dir, host=host, port=port, ui_dir=ui_dir)


@cli.command("export")
@click.option("--store", "store_dir", type=click.Path(exists=True), required=True)
@click.option("--version", type=click.Choice(["meta1", "metam"]), required=True)
@click.option("--out", required=True, type=click.Path())
def export_cmd(store_dir, version, out):
    """Build the transformed corpus once every case is resolved."""
    from .review import ReviewStore

    started = time.time()
    tag = {"meta1": "META_1", "metam": "META_m"}[version]
    store = ReviewStore(store_dir)
    corpus = store.export_ready(tag, out)
    click.echo(f"wrote {corpus.name!r} ({sum(1 for _ in corpus.iter_mentions())} mentions)")
    write_manifest("export", {"version": tag}, {}, {"corpus": out}, started)


# -- filtering ----------------------------------------------------------------


@cli.group("filter")
def filter_group():
    """Mention-pair candidate generation."""


@filter_group.command("lh")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--split", required=True)
@click.option("--threshold", type=float, default=0.005, show_default=True)
@click.option("--use-stopwords", is_flag=True)
@click.option("--synonym-split", default="train", show_default=True)
@click.option("--scope", type=click.Choice([filters.INTRA_TOPIC, filters.CORPUS_WIDE]),
              default=filters.INTRA_TOPIC, show_default=True)
@click.option("--candidates", "candidates_path", type=click.Path(exists=True),
              default=None, help="Candidate pair file (default: all in-scope pairs).")
@click.option("--out", required=True, type=click.Path())
def filter_lh(corpus_path, split, threshold, use_stopwords, synonym_split, scope,
              candidates_path, out):
    """Lemma-heuristic filter: synonymy plus sentence overlap."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    config = filters.LhConfig(overlap_threshold=threshold, use_stopwords=use_stopwords)
    syn = filters.mine_synonym_pairs(corpus, synonym_split)
    if candidates_path:
        candidates = filters.load_pairs(candidates_path, corpus)
    else:
        candidates = filters.all_pairs(corpus, split, scope)
    kept = filters.lh_filter(corpus, candidates, syn, config)
    filters.save_pairs(kept, out)
    click.echo(f"retained {len(kept)}/{len(candidates)} pairs "
               f"({len(syn)} synonym pairs mined from {synonym_split!r})")
    inputs = {"corpus": corpus_path}
    if candidates_path:
        inputs["candidates"] = candidates_path
    write_manifest("filter lh",
                   {"split": split, "threshold": threshold,
                    "use_stopwords": use_stopwords, "synonym_split": synonym_split,
                    "scope": scope},
                   inputs, {"pairs": out}, started)


@filter_group.command("knn")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--split", required=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True),
              required=True)
@click.option("--scope", type=click.Choice([filters.INTRA_TOPIC, filters.CORPUS_WIDE]),
              default=filters.INTRA_TOPIC, show_default=True)
@click.option("--out", required=True, type=click.Path())
def filter_knn(corpus_path, split, k, embeddings_path, scope, out):
    """Cosine K-nearest-neighbor candidate retrieval."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    table = filters.EmbeddingTable.load(embeddings_path)
    pairs = filters.knn_candidates(table, corpus, split,
                                   filters.KnnConfig(k=k, scope=scope))
    filters.save_pairs(pairs, out)
    click.echo(f"retrieved {len(pairs)} pairs")
    write_manifest("filter knn", {"split": split, "k": k, "scope": scope},
                   {"corpus": corpus_path, "embeddings": embeddings_path},
                   {"pairs": out}, started)


# -- scoring ------------------------------------------------------------------


@cli.group("score")
def score_group():
    """Pairwise coreference scoring."""


@score_group.command("lexical")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), required=True)
@click.option("--out", required=True, type=click.Path())
def score_lexical(pairs_path, out):
    """Score every filter-surviving pair 1.0 (the lexical baseline)."""
    started = time.time()
    pairs = filters.load_pairs(pairs_path)
    scores = scoring.lexical_score(pairs)
    scoring.export_scores(scores, out)
    click.echo(f"scored {len(scores)} pairs")
    write_manifest("score lexical", {}, {"pairs": pairs_path}, {"scores": out}, started)


@score_group.command("external")
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None)
@click.option("--out", required=True, type=click.Path())
def score_external(scores_path, corpus_path, out):
    """Validate and canonicalize an externally computed score file."""
    started = time.time()
    corpus = ingest_corpus(corpus_path) if corpus_path else None
    scores = scoring.ingest_scores(scores_path, corpus)
    scoring.export_scores(scores, out)
    click.echo(f"ingested {len(scores)} scores")
    inputs = {"scores": scores_path}
    if corpus_path:
        inputs["corpus"] = corpus_path
    write_manifest("score external", {}, inputs, {"scores": out}, started)


@score_group.command("eq1")
@click.option("--pair-vectors", "pv_path", type=click.Path(exists=True), required=True)
@click.option("--head", "head_path", type=click.Path(exists=True), required=True)
@click.option("--out", required=True, type=click.Path())
def score_eq1(pv_path, head_path, out):
    """Joint-representation logistic scorer over encoded pair vectors."""
    started = time.time()
    pair_vectors = scoring.load_pair_vectors(pv_path)
    head = scoring.LogisticHead.load(head_path)
    scores = scoring.eq1_score_pairs(pair_vectors, head)
    scoring.export_scores(scores, out)
    click.echo(f"scored {len(scores)} pairs")
    write_manifest("score eq1", {}, {"pair_vectors": pv_path, "head": head_path},
                   {"scores": out}, started)


@score_group.command("llm")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), required=True)
@click.option("--llm-config", "llm_config_path", type=click.Path(exists=True),
              required=True)
@click.option("--template", default=None, help="Prompt template name.")
@click.option("--out", required=True, type=click.Path())
def score_llm(corpus_path, pairs_path, llm_config_path, template, out):
    """Yes/No chat-classifier scoring."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    pairs = filters.load_pairs(pairs_path, corpus)
    config = LlmConfig.load(llm_config_path)
    with ChatClient(config) as client:
        scores, unresolved = scoring.llm_classify_pairs(corpus, pairs, client, template)
    scoring.export_scores(scores, out)
    if unresolved:
        with open(out + ".unresolved", "w", encoding="utf-8") as fh:
            for p in unresolved:
                fh.write(f"{p.a}\t{p.b}\n")
    click.echo(f"scored {len(scores)} pairs, {len(unresolved)} unresolved, "
               f"{client.requests_sent} requests")
    write_manifest("score llm", {"template": template or "default"},
                   {"corpus": corpus_path, "pairs": pairs_path,
                    "llm_config": llm_config_path},
                   {"scores": out}, started)


# -- clustering -----------------------------------------------------------------


@cli.group("cluster")
def cluster_group():
    """Turn pair scores into a mention partition."""


def _split_mentions(corpus_path, split):
    corpus = ingest_corpus(corpus_path)
    return {m.mention_id for m in corpus.mentions_in_split(split)}


@cluster_group.command("cc")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--split", required=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--link-threshold", type=float, default=0.5, show_default=True)
@click.option("--out", required=True, type=click.Path())
def cluster_cc(corpus_path, split, scores_path, link_threshold, out):
    """Connected components over links scoring at or above the threshold."""
    started = time.time()
    mentions = _split_mentions(corpus_path, split)
    scores = scoring.ingest_scores(scores_path)
    assignment = clustering.connected_components(mentions, scores, link_threshold)
    assignment.save(out)
    click.echo(f"{len(assignment.clusters())} clusters over {len(assignment)} mentions")
    write_manifest("cluster cc", {"split": split, "link_threshold": link_threshold},
                   {"corpus": corpus_path, "scores": scores_path},
                   {"assignment": out}, started)


@cluster_group.command("agglo")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--split", required=True)
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True)
@click.option("--tau", type=float, default=0.5, show_default=True)
@click.option("--linkage", type=click.Choice(["average", "max"]), default="average",
              show_default=True)
@click.option("--out", required=True, type=click.Path())
def cluster_agglo(corpus_path, split, scores_path, tau, linkage, out):
    """Greedy agglomeration until the best linkage falls below tau."""
    started = time.time()
    mentions = _split_mentions(corpus_path, split)
    scores = scoring.ingest_scores(scores_path)
    config = clustering.AggloConfig(linkage=linkage, stop_threshold=tau)
    assignment = clustering.greedy_agglomeration(mentions, scores, config)
    assignment.save(out)
    click.echo(f"{len(assignment.clusters())} clusters over {len(assignment)} mentions")
    write_manifest("cluster agglo",
                   {"split": split, "tau": tau, "linkage": linkage},
                   {"corpus": corpus_path, "scores": scores_path},
                   {"assignment": out}, started)


# -- evaluation -----------------------------------------------------------------


@cli.command()
@click.option("--gold", "gold_path", type=click.Path(exists=True), required=True)
@click.option("--split", required=True)
@click.option("--pred", "pred_path", type=click.Path(exists=True), required=True)
@click.option("--out", required=True, type=click.Path())
def evaluate(gold_path, split, pred_path, out):
    """MUC, B-cubed, CEAF-e, and CoNLL F1 of a predicted assignment."""
    started = time.time()
    corpus = ingest_corpus(gold_path)
    gold = metrics.gold_assignment(corpus, split)
    pred = clustering.ClusterAssignment.load(pred_path)
    report = metrics.evaluate(gold, pred)
    report.save(out)
    for line in report.lines():
        click.echo(line)
    write_manifest("evaluate", {"split": split},
                   {"gold": gold_path, "pred": pred_path},
                   {"report": out}, started)


@cli.command("oracle-recall")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--retained", "retained_path", type=click.Path(exists=True), required=True)
@click.option("--split", required=True)
@click.option("--out", required=True, type=click.Path())
def oracle_recall_cmd(corpus_path, retained_path, split, out):
    """B-cubed recall ceiling of a filter's retained pairs."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    retained = filters.load_pairs(retained_path, corpus)
    value = metrics.oracle_recall(corpus, retained, split)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"oracle_b3_recall\t{value:.6f}\n")
    click.echo(f"oracle_b3_recall\t{value:.6f}")
    write_manifest("oracle-recall", {"split": split},
                   {"corpus": corpus_path, "retained": retained_path},
                   {"report": out}, started)


@cli.command("diversity")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--split", required=True)
@click.option("--ttr-threshold", type=float, default=diversity.DEFAULT_TTR_THRESHOLD,
              show_default=True)
@click.option("--out", required=True, type=click.Path())
def diversity_cmd(corpus_path, split, ttr_threshold, out):
    """Cluster-size-weighted MTLD of event-cluster triggers."""
    started = time.time()
    corpus = ingest_corpus(corpus_path)
    report = diversity.cluster_diversity(corpus, split, ttr_threshold)
    report.save(out)
    if report.all_singletons:
        click.echo("warning: no non-singleton clusters in this split", err=True)
    click.echo(f"WEIGHTED\t{report.corpus_weighted_mtld:.6f}")
    write_manifest("diversity", {"split": split, "ttr_threshold": ttr_threshold},
                   {"corpus": corpus_path}, {"report": out}, started)


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except LlmTransportError as exc:
        click.echo(f"error: {exc}", err=True)
        return 4
    except (ValidationError, ParseError, NotFoundError, ConflictError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except CoreftkError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
