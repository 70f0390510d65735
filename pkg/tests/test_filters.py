"""Filter module: synonym mining, overlap pruning, KNN retrieval."""

import random

import numpy as np
import pytest

from coreftk.corpus import Corpus, Document, Topic
from coreftk.errors import NotFoundError, ValidationError
from coreftk.filters import (CORPUS_WIDE, INTRA_TOPIC, EmbeddingTable, KnnConfig,
                             LhConfig, MentionPair, SynonymSet, all_pairs,
                             knn_candidates, lh_filter, load_pairs,
                             mine_synonym_pairs, save_pairs,
                             sentence_overlap_ratio)

from conftest import make_mention, make_sentence


def pair(a, b):
    return MentionPair.of(a, b)


class TestMentionPair:
    def test_canonical_order(self):
        assert pair("z", "a") == MentionPair("a", "z")

    def test_self_pair_rejected(self):
        with pytest.raises(ValidationError):
            pair("a", "a")

    def test_non_canonical_rejected(self):
        with pytest.raises(ValidationError):
            MentionPair("z", "a")


class TestSynonymMining:
    def test_fixture_pairs(self, tiny_corpus):
        syn = mine_synonym_pairs(tiny_corpus, "train")
        assert syn.pairs == {("kill", "slay"), ("fire", "oust")}
        assert syn.contains("slay", "kill")
        assert not syn.contains("kill", "fire")

    def test_homogeneous_clusters_empty(self):
        s0 = make_sentence(0, "The killing happened .")
        s1 = make_sentence(0, "Another killing happened .")
        docs = (Document("d1", (s0,), (make_mention("a", "d1", s0, 1, 2, "C"),)),
                Document("d2", (s1,), (make_mention("b", "d2", s1, 1, 2, "C"),)))
        corpus = Corpus("x", (Topic("1", docs),), {"a": "train", "b": "train"})
        assert mine_synonym_pairs(corpus, "train").pairs == frozenset()

    def test_unknown_split(self, tiny_corpus):
        with pytest.raises(ValidationError):
            mine_synonym_pairs(tiny_corpus, "validation")

    def test_empty_split(self, tiny_corpus):
        with pytest.raises(ValidationError, match="no mentions"):
            mine_synonym_pairs(tiny_corpus, "test")


def overlap_fixture():
    """Two sentences with non-stopword lemma sets {alpha,beta,gamma} / {gamma,delta}."""
    s0 = make_sentence(0, "alpha beta gamma .")
    s1 = make_sentence(0, "gamma delta .")
    docs = (Document("d1", (s0,), (make_mention("a", "d1", s0, 0, 1, "C1"),)),
            Document("d2", (s1,), (make_mention("b", "d2", s1, 0, 1, "C2"),)))
    return Corpus("x", (Topic("1", docs),), {"a": "test", "b": "test"})


class TestOverlapRatio:
    def test_identical_sentences(self, tiny_corpus):
        # m1 and m6 share the very same sentence
        assert sentence_overlap_ratio(tiny_corpus, pair("m1", "m6")) == 1.0

    def test_disjoint(self, tiny_corpus):
        # topic-1 killing sentence vs topic-2 firing sentence share no lemmas
        assert sentence_overlap_ratio(tiny_corpus, pair("m1", "m4")) == 0.0

    def test_hand_derived_quarter(self):
        corpus = overlap_fixture()
        assert sentence_overlap_ratio(corpus, pair("a", "b")) == 0.25

    def test_stopwords_included_on_request(self, tiny_corpus):
        with_stops = sentence_overlap_ratio(
            tiny_corpus, pair("m1", "m4"), LhConfig(use_stopwords=True))
        assert with_stops > 0.0  # both sentences contain "was", "the", "."


class TestLhFilter:
    def test_equal_lemma_retained(self, tiny_corpus):
        kept = lh_filter(tiny_corpus, [pair("m1", "m3")], SynonymSet(),
                         LhConfig(overlap_threshold=0.005))
        assert kept == [pair("m1", "m3")]

    def test_synonymy_necessary(self, tiny_corpus):
        # same sentence => overlap 1.0, but kill/party are not synonyms
        kept = lh_filter(tiny_corpus, [pair("m1", "m6")], SynonymSet())
        assert kept == []

    def test_threshold_necessary(self, tiny_corpus):
        syn = SynonymSet.of([("fire", "kill")])
        # disjoint sentences: overlap 0.0 < 0.005
        kept = lh_filter(tiny_corpus, [pair("m1", "m4")], syn)
        assert kept == []
        kept = lh_filter(tiny_corpus, [pair("m1", "m4")], syn,
                         LhConfig(overlap_threshold=0.0))
        assert kept == [pair("m1", "m4")]

    def test_synonym_pair_retained(self, tiny_corpus):
        syn = mine_synonym_pairs(tiny_corpus, "train")
        kept = lh_filter(tiny_corpus, [pair("m2", "m3")], syn)
        assert kept == [pair("m2", "m3")]  # slay/kill mined, sentences share lemmas

    def test_output_subset_and_sorted(self, pipeline_corpus):
        candidates = all_pairs(pipeline_corpus, "test", INTRA_TOPIC)
        syn = mine_synonym_pairs(pipeline_corpus, "train")
        kept = lh_filter(pipeline_corpus, candidates, syn)
        assert set(kept) <= set(candidates)
        assert kept == sorted(set(kept))

    def test_permissive_settings_keep_everything(self, pipeline_corpus):
        from coreftk.corpus import mention_lemma

        candidates = all_pairs(pipeline_corpus, "test", INTRA_TOPIC)
        lemmas = {mention_lemma(pipeline_corpus, m.mention_id)
                  for m in pipeline_corpus.mentions_in_split("test")}
        every = SynonymSet.of([(x, y) for x in lemmas for y in lemmas if x < y])
        kept = lh_filter(pipeline_corpus, candidates, every,
                         LhConfig(overlap_threshold=0.0))
        assert kept == candidates

    def test_monotone_in_synonyms_and_threshold(self, pipeline_corpus):
        rng = random.Random(17)
        candidates = all_pairs(pipeline_corpus, "test", INTRA_TOPIC)
        full = sorted(mine_synonym_pairs(pipeline_corpus, "train").pairs
                      | {("banker", "coach"), ("crew", "staff")})
        for _ in range(30):
            sub = frozenset(p for p in full if rng.random() < 0.5)
            sup = frozenset(p for p in full if p in sub or rng.random() < 0.5)
            t_low = rng.uniform(0.0, 0.3)
            t_high = t_low + rng.uniform(0.0, 0.4)
            kept_strict = lh_filter(pipeline_corpus, candidates, SynonymSet(sub),
                                    LhConfig(overlap_threshold=t_high))
            kept_loose = lh_filter(pipeline_corpus, candidates, SynonymSet(sup),
                                   LhConfig(overlap_threshold=t_low))
            assert set(kept_strict) <= set(kept_loose)


class TestAllPairs:
    def test_single_topic(self):
        s = make_sentence(0, "alpha beta gamma delta")
        mentions = tuple(make_mention(f"m{i}", "d1", s, i, i + 1, f"C{i}")
                         for i in range(4))
        corpus = Corpus("x", (Topic("1", (Document("d1", (s,), mentions),)),),
                        {f"m{i}": "test" for i in range(4)})
        assert len(all_pairs(corpus, "test", INTRA_TOPIC)) == 6

    def test_intra_topic_excludes_cross(self, tiny_corpus):
        pairs = all_pairs(tiny_corpus, "train", INTRA_TOPIC)
        # topic 1 holds m1, m2, m6 (train); topic 2 holds m4, m5
        assert pairs == sorted([pair("m1", "m2"), pair("m1", "m6"),
                                pair("m2", "m6"), pair("m4", "m5")])

    def test_corpus_wide(self, tiny_corpus):
        pairs = all_pairs(tiny_corpus, "train", CORPUS_WIDE)
        assert len(pairs) == 10  # C(5,2) over the train mentions


def knn_fixture():
    s = make_sentence(0, "alpha beta gamma")
    mentions = tuple(make_mention(f"m{i}", "d1", s, i - 1, i, f"C{i}")
                     for i in (1, 2, 3))
    corpus = Corpus("x", (Topic("1", (Document("d1", (s,), mentions),)),),
                    {"m1": "test", "m2": "test", "m3": "test"})
    table = EmbeddingTable({"m1": [1.0, 0.0], "m2": [0.9, 0.436], "m3": [0.0, 1.0]})
    return corpus, table


class TestKnn:
    def test_hand_derived_k1(self):
        corpus, table = knn_fixture()
        pairs = knn_candidates(table, corpus, "test", KnnConfig(k=1))
        assert pairs == [pair("m1", "m2"), pair("m2", "m3")]

    def test_k_zero(self):
        corpus, table = knn_fixture()
        assert knn_candidates(table, corpus, "test", KnnConfig(k=0)) == []

    def test_k_exhaustive(self):
        corpus, table = knn_fixture()
        pairs = knn_candidates(table, corpus, "test", KnnConfig(k=2))
        assert pairs == all_pairs(corpus, "test", INTRA_TOPIC)

    def test_missing_embedding_named(self):
        corpus, _ = knn_fixture()
        table = EmbeddingTable({"m1": [1.0, 0.0], "m2": [0.9, 0.436]})
        with pytest.raises(NotFoundError, match="m3"):
            knn_candidates(table, corpus, "test", KnnConfig(k=1))

    def test_zero_vector_rejected(self):
        with pytest.raises(ValidationError, match="zero vector"):
            EmbeddingTable({"m1": [0.0, 0.0]})

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError, match="non-finite"):
            EmbeddingTable({"m1": [1.0, float("nan")]})

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(ValidationError, match="dimension"):
            EmbeddingTable({"m1": [1.0, 0.0], "m2": [1.0, 0.0, 0.0]})

    def test_scale_invariance(self, pipeline_corpus):
        from conftest import pipeline_embeddings

        raw = pipeline_embeddings(pipeline_corpus)
        base = knn_candidates(EmbeddingTable(raw), pipeline_corpus, "test",
                              KnnConfig(k=3))
        for alpha in (2.0, 0.5, 10.0, 3.7, 1e3):
            scaled = EmbeddingTable({k: [alpha * x for x in v]
                                     for k, v in raw.items()})
            assert knn_candidates(scaled, pipeline_corpus, "test",
                                  KnnConfig(k=3)) == base

    def test_intra_topic_scope(self, pipeline_corpus):
        from conftest import pipeline_embeddings

        table = EmbeddingTable(pipeline_embeddings(pipeline_corpus))
        pairs = knn_candidates(table, pipeline_corpus, "test",
                               KnnConfig(k=4, scope=INTRA_TOPIC))
        for p in pairs:
            assert pipeline_corpus.topic_of(p.a) == pipeline_corpus.topic_of(p.b)

    def test_determinism(self, pipeline_corpus):
        from conftest import pipeline_embeddings

        table = EmbeddingTable(pipeline_embeddings(pipeline_corpus))
        runs = [knn_candidates(table, pipeline_corpus, "test", KnnConfig(k=2))
                for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]


class TestFiles:
    def test_embedding_round_trip(self, tmp_path):
        table = EmbeddingTable({"m1": [1.0, -0.25], "m2": [0.125, 3.5]})
        path = str(tmp_path / "emb.tsv")
        table.save(path)
        again = EmbeddingTable.load(path)
        assert again.dim == 2
        assert np.array_equal(again.vector("m1"), table.vector("m1"))
        assert np.array_equal(again.vector("m2"), table.vector("m2"))

    def test_pairs_round_trip(self, tmp_path):
        pairs = [pair("a", "b"), pair("b", "c")]
        path = str(tmp_path / "pairs.tsv")
        save_pairs(pairs, path)
        assert load_pairs(path) == pairs

    def test_duplicate_pair_rejected(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("a\tb\nb\ta\n")
        with pytest.raises(Exception, match="duplicate"):
            load_pairs(str(path))
