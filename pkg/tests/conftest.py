"""Shared fixtures: hand-built corpora and a scripted chat client."""

import json
import random

import httpx
import pytest

from coreftk.corpus import Corpus, Document, Mention, Sentence, Token, Topic
from coreftk.llm import ChatClient, LlmConfig
from coreftk.metamorph import ParaphraseRecord

STOPWORDS = {
    "a", "an", "the", "was", "were", "is", "are", "at", "after", "on", "in",
    "of", "its", "his", "her", "by", "to", "and", "or", "before", "whole",
    ".", ",", ";", "being",
}

LEMMAS = {
    "killing": "kill", "slaying": "slay", "murder": "murder",
    "fired": "fire", "ousted": "oust", "dismissed": "dismiss",
    "arrested": "arrest", "captured": "capture", "detained": "detain",
    "won": "win", "triumphed": "triumph", "prevailed": "prevail",
    "charged": "charge", "shocked": "shock", "recalled": "recall",
    "witnesses": "witness", "playoffs": "playoff", "stunned": "stun",
    "said": "say", "lingered": "linger",
}


def make_sentence(index, text):
    tokens = tuple(
        Token(text=w, lemma=LEMMAS.get(w.lower(), w.lower()),
              is_stopword=w.lower() in STOPWORDS)
        for w in text.split())
    return Sentence(index=index, tokens=tokens)


def make_mention(mid, doc_id, sent, start, end, cluster):
    return Mention(
        mention_id=mid, doc_id=doc_id, sentence_index=sent.index,
        token_start=start, token_end_exclusive=end,
        trigger_text=" ".join(t.text for t in sent.tokens[start:end]),
        gold_cluster_id=cluster)


@pytest.fixture
def tiny_corpus():
    """2 topics, 4 docs, 6 mentions; gold clusters CK={m1,m2,m3},
    CF={m4,m5}, CP={m6}; everything train except m3 (dev)."""
    s110 = make_sentence(0, "A man was charged after a killing at an office party .")
    s111 = make_sentence(1, "The slaying at the office party shocked the city .")
    s120 = make_sentence(0, "Witnesses recalled the killing at the party .")
    s210 = make_sentence(0, "The coach was fired on Saturday .")
    s220 = make_sentence(0, "The team ousted its coach before the playoffs .")

    d11 = Document(doc_id="1_1", sentences=(s110, s111), mentions=(
        make_mention("m1", "1_1", s110, 6, 7, "CK"),
        make_mention("m6", "1_1", s110, 10, 11, "CP"),
        make_mention("m2", "1_1", s111, 1, 2, "CK"),
    ))
    d12 = Document(doc_id="1_2", sentences=(s120,), mentions=(
        make_mention("m3", "1_2", s120, 3, 4, "CK"),
    ))
    d21 = Document(doc_id="2_1", sentences=(s210,), mentions=(
        make_mention("m4", "2_1", s210, 3, 4, "CF"),
    ))
    d22 = Document(doc_id="2_2", sentences=(s220,), mentions=(
        make_mention("m5", "2_2", s220, 2, 3, "CF"),
    ))
    return Corpus(
        name="tiny",
        topics=(Topic("1", (d11, d12)), Topic("2", (d21, d22))),
        split_map={"m1": "train", "m2": "train", "m3": "dev",
                   "m4": "train", "m5": "train", "m6": "train"})


# -- pipeline corpus: 4 topics, one mention per sentence ----------------------

FAMILIES = {
    "kill": ["killing", "killing", "slaying", "murder"],
    "fire": ["fired", "fired", "ousted", "dismissed"],
    "arrest": ["arrested", "arrested", "captured", "detained"],
}

CONTEXTS = {
    "kill": "The {} of the banker in Vancouver stunned the office staff .",
    "fire": "The {} of the coach surprised the Philadelphia fans .",
    "arrest": "The {} of the pirates near Aden relieved the crew .",
    "blast": "The {} near the bank frightened the tellers .",
}

# decoy cluster in the test topics: its first member reuses the kill
# lemma, so the lemma heuristic wrongly links it into the kill cluster
DECOY = ["killing", "blast", "blast", "blast"]

METAPHORS = {
    ("kill", 2): "snuffing out the flame",
    ("kill", 3): "silencing of the heartbeat",
    ("fire", 2): "closing of the curtain",
    ("fire", 3): "untying of the reins",
    ("arrest", 2): "casting of the net",
    ("arrest", 3): "chaining of the storm",
}


def build_pipeline_corpus(perturbed=False):
    """4 topics x (3..4) clusters x 4 mentions, one mention per sentence.

    Topics 1-2 are train, 3-4 test (test topics carry the extra decoy
    cluster). Cluster members share trigger families (two literal repeats
    plus two synonyms), so the lemma heuristic works well; the perturbed
    variant swaps the two synonym slots of every *test* family cluster
    for multi-word metaphors, which starves LH of mined synonym pairs
    exactly the way figurative rewrites do.
    """
    topics = []
    split_map = {}
    for t in range(1, 5):
        split = "train" if t <= 2 else "test"
        docs = []
        for d in range(4):
            doc_id = f"t{t}_d{d}"
            sentences = []
            mentions = []
            clusters = dict(FAMILIES)
            if split == "test":
                clusters["blast"] = DECOY
            for s, family in enumerate(clusters):
                trigger = clusters[family][d]
                if perturbed and split == "test" and family != "blast" and d >= 2:
                    trigger = METAPHORS[(family, d)]
                text = CONTEXTS[family].format(trigger)
                sent = make_sentence(s, text)
                sentences.append(sent)
                n_trig = len(trigger.split())
                mid = f"t{t}_d{d}_{family}"
                mentions.append(make_mention(mid, doc_id, sent, 1, 1 + n_trig,
                                             f"t{t}_{family}"))
                split_map[mid] = split
            docs.append(Document(doc_id=doc_id, sentences=tuple(sentences),
                                 mentions=tuple(mentions)))
        topics.append(Topic(topic_id=str(t), documents=tuple(docs)))
    name = "pipeline_meta" if perturbed else "pipeline"
    return Corpus(name=name, topics=tuple(topics), split_map=split_map)


@pytest.fixture
def pipeline_corpus():
    return build_pipeline_corpus()


@pytest.fixture
def perturbed_corpus():
    return build_pipeline_corpus(perturbed=True)


def pipeline_embeddings(corpus, dim=8, noise=0.05, seed=11):
    """Deterministic per-mention vectors that point along a cluster axis."""
    rng = random.Random(seed)
    families = list(FAMILIES) + ["blast"]
    vectors = {}
    for m in sorted(corpus.iter_mentions(), key=lambda m: m.mention_id):
        family = m.mention_id.rsplit("_", 1)[1]
        base = [0.0] * dim
        base[families.index(family)] = 1.0
        vec = [b + rng.uniform(-noise, noise) for b in base]
        vectors[m.mention_id] = vec
    return vectors


def external_scores_for(corpus, pairs):
    """Deterministic mock cross-encoder scores: confident and correct,
    except that the topic-4 kill cluster is a "hard" cluster it fails on,
    so downstream clustering and metrics have something nontrivial to
    chew on."""
    lines = []
    for p in sorted(pairs):
        gold = (corpus.mention(p.a).gold_cluster_id
                == corpus.mention(p.b).gold_cluster_id)
        if gold and corpus.mention(p.a).gold_cluster_id == "t4_kill":
            score = 0.3
        else:
            score = 0.92 if gold else 0.08
        lines.append(f"{p.a}\t{p.b}\t{score}")
    return "\n".join(lines) + "\n"


# -- scripted LLM client -------------------------------------------------------


def scripted_client(replies, config=None, record_requests=None):
    """ChatClient whose endpoint plays back canned assistant replies.

    ``replies`` entries are reply strings, or callables taking the parsed
    request body (so a script can key on the prompt contents).
    """
    queue = list(replies)

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        if record_requests is not None:
            record_requests.append(body)
        if not queue:
            raise AssertionError("scripted client ran out of replies")
        reply = queue.pop(0)
        if callable(reply):
            reply = reply(body)
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": reply}}]})

    config = config or LlmConfig(endpoint="http://llm.test/v1/chat",
                                 model_name="test-model")
    return ChatClient(config, transport=httpx.MockTransport(handler),
                      sleep=lambda _: None)


def paraphrase_reply(sentence, originals, metaphors, new_sentence):
    return json.dumps({
        "Original Sentence": sentence,
        "Original Word List": list(originals),
        "Metaphoric Word List": list(metaphors),
        "Metaphoric Sentence": new_sentence,
    })


# -- metamorph fixture over the tiny corpus ------------------------------------


def metamorph_records(corpus):
    """Hand-written multi-word paraphrase records for every tiny-corpus
    sentence; two of them are deliberately ambiguous to align."""

    def rec(doc_id, idx, originals, metaphors, new_sentence):
        sent = corpus.document(doc_id).sentences[idx]
        return ParaphraseRecord(
            doc_id=doc_id, sentence_index=idx, original_sentence=sent.text,
            original_word_list=tuple(originals),
            metaphoric_word_list=tuple(metaphors),
            metaphoric_sentence=new_sentence, mode="multi-word",
            raw_response="", prompt_hash="fixture")

    return [
        rec("1_1", 0, ["killing", "party"],
            ["snuffing of the flame", "conclave of festive hearts"],
            "A man was charged after a snuffing of the flame at an office "
            "conclave of festive hearts ."),
        rec("1_1", 1, ["slaying"], ["silencing of life"],
            "The silencing of life shocked the whole city ."),
        # "echo" appears twice: ambiguous
        rec("1_2", 0, ["killing"], ["echo"],
            "Witnesses recalled the echo at the party , an echo that lingered ."),
        # "shown the door" appears twice: ambiguous
        rec("2_1", 0, ["fired"], ["shown the door"],
            "The coach was shown the door after being shown the door on Saturday ."),
        rec("2_2", 0, ["ousted"], ["cast out"],
            "The team cast out its coach before the playoffs ."),
    ]


@pytest.fixture
def metamorph_fixture(tiny_corpus):
    from coreftk.metamorph import align_records

    records = metamorph_records(tiny_corpus)
    cases = align_records(tiny_corpus, records)
    return tiny_corpus, records, cases
