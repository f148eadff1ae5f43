import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nstage_lda.corpus import Corpus, Document, Vocabulary
from nstage_lda.evaluation import (
    EvalError,
    TopicLabeling,
    classify,
    dominant_topic,
    evaluate,
    label_topics,
    split_documents,
)
from nstage_lda.inference import LdaConfig, TopicModel


def make(theta, labels):
    theta = np.asarray(theta, dtype=float)
    vocab = Vocabulary(("w",))
    docs = tuple(Document((0,), lab) for lab in labels)
    model = TopicModel(np.ones((theta.shape[1], 1)), theta, LdaConfig(num_topics=2), vocab)
    return model, Corpus(vocab, docs)


@pytest.mark.parametrize("row, k", [([0.1, 0.7, 0.2], 1), ([0.5, 0.5], 0), ([0.25] * 4, 0)])
def test_dominant_topic(row, k):
    assert dominant_topic(row) == k


@settings(max_examples=200)
@given(st.lists(st.integers(0, 10**6), min_size=2, max_size=8))
def test_dominant_topic_monotone_invariance(counts):
    # transforms chosen to be strictly increasing in floating point too
    arr = np.array(counts, dtype=float) / 2**20
    k = dominant_topic(arr)
    assert dominant_topic(8.0 * arr) == k
    assert dominant_topic(arr + 3.0) == k
    assert dominant_topic(np.array(counts) ** 3) == k


def test_majority_labeling():
    model, corpus = make(
        [[0.9, 0.1], [0.8, 0.2], [0.7, 0.3], [0.6, 0.4], [0.2, 0.8]],
        ["anger", "anger", "anger", "fear", "fear"],
    )
    labeling = label_topics(model, corpus, "majority")
    assert labeling.topic_to_label == ("anger", "fear")


def test_majority_ties_and_idle_topics():
    model, corpus = make(
        [[0.9, 0.1, 0.0], [0.8, 0.2, 0.0], [0.1, 0.1, 0.8]],
        ["fear", "anger", "fear"],
    )
    labeling = label_topics(model, corpus, "majority")
    # topic 0 ties anger/fear -> "anger"; topic 1 owns nothing -> most frequent label "fear"
    assert labeling.topic_to_label == ("anger", "fear", "fear")


def test_hungarian_agrees_when_unambiguous():
    model, corpus = make([[0.9, 0.1], [0.2, 0.8], [0.7, 0.3]], ["b", "a", "b"])
    assert label_topics(model, corpus, "hungarian").topic_to_label == ("b", "a")
    assert label_topics(model, corpus, "majority").topic_to_label == ("b", "a")


def test_hungarian_is_one_to_one():
    # majority would give both topics "x"
    model, corpus = make([[0.9, 0.1]] * 3 + [[0.1, 0.9]] * 2 + [[0.2, 0.8]], ["x", "x", "x", "x", "x", "y"])
    lab = label_topics(model, corpus, "hungarian")
    assert sorted(lab.topic_to_label) == ["x", "y"]
    assert label_topics(model, corpus, "majority").topic_to_label == ("x", "x")


def test_hungarian_needs_enough_topics():
    model, corpus = make([[0.9, 0.1]] * 3, ["a", "b", "c"])
    with pytest.raises(EvalError):
        label_topics(model, corpus, "hungarian")


def test_labels_required():
    model, corpus = make([[0.9, 0.1]], [None])
    with pytest.raises(EvalError, match="labels required"):
        label_topics(model, corpus)
    with pytest.raises(EvalError, match="labels required"):
        evaluate(model, corpus, TopicLabeling(("a", "b"), "majority"))


def test_perfect_accuracy():
    model, corpus = make([[0.9, 0.1], [0.1, 0.9]], ["a", "b"])
    result = evaluate(model, corpus, TopicLabeling(("a", "b"), "majority"))
    assert result.accuracy == 1.0
    assert result.confusion.tolist() == [[1, 0], [0, 1]]


def test_adversarial_labeling():
    model, corpus = make([[0.9, 0.1]] * 3 + [[0.1, 0.9]], ["a", "a", "a", "b"])
    good = evaluate(model, corpus, TopicLabeling(("a", "b"), "majority"))
    swapped = evaluate(model, corpus, TopicLabeling(("b", "a"), "majority"))
    assert swapped.accuracy == 1 - good.accuracy == 0.0
    np.testing.assert_array_equal(swapped.confusion.sum(axis=1), good.confusion.sum(axis=1))
    assert swapped.total == 4


def test_empty_document_falls_to_topic_zero():
    model, corpus = make([[0.5, 0.5], [0.1, 0.9]], ["a", "b"])
    result = evaluate(model, corpus, TopicLabeling(("a", "b"), "majority"))
    assert result.accuracy == 1.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(2, 30))
def test_confusion_total_and_relabel_invariance(seed, K, n):
    rng = np.random.default_rng(seed)
    theta = rng.dirichlet(np.ones(K), size=n)
    names = ["p", "q", "r", "s"][:K]
    labels = [names[i] for i in rng.integers(0, K, size=n)]
    model, corpus = make(theta, labels)
    lab = label_topics(model, corpus)
    res = evaluate(model, corpus, lab)
    assert res.total == n
    assert res.accuracy == pytest.approx(np.trace(res.confusion) / n)
    rename = {a: b for a, b in zip(names, reversed(names))}
    model2, corpus2 = make(theta, [rename[x] for x in labels])
    res2 = evaluate(model2, corpus2, TopicLabeling(tuple(rename[x] for x in lab.topic_to_label), "majority"))
    assert res2.accuracy == res.accuracy


def test_synthetic_hungarian_is_optimal(clean_fit, clean_corpus):
    model, _ = clean_fit
    truth = [d.label for d in clean_corpus.documents]
    best = oracles.brute_best_assignment(model.theta, truth, sorted(clean_corpus.labels))
    hung = classify(model, clean_corpus, "hungarian").accuracy
    maj = classify(model, clean_corpus, "majority").accuracy
    assert hung == pytest.approx(best, abs=1e-12)
    assert hung >= maj - 1e-12


def test_synthetic_n1_accuracy(clean_fit, clean_corpus):
    model, _ = clean_fit
    # pinned value from the shipped seeds
    assert classify(model, clean_corpus).accuracy == 0.98


def test_split_mode(clean_fit, clean_corpus):
    model, _ = clean_fit
    train, test = split_documents(len(clean_corpus), 0.25, seed=3)
    assert len(test) == 50 and not set(train) & set(test)
    result = classify(model, clean_corpus, test_fraction=0.25, seed=3)
    assert result.total == 50
    with pytest.raises(EvalError):
        split_documents(10, 1.0, 0)


def test_confusion_table_text():
    model, corpus = make([[0.9, 0.1], [0.1, 0.9]], ["anger", "fear"])
    table = evaluate(model, corpus, TopicLabeling(("anger", "fear"), "majority")).confusion_table()
    lines = table.splitlines()
    assert lines[0].split() == ["true\\pred", "anger", "fear"]
    assert lines[1].split() == ["anger", "1", "0"]
    assert len({len(line) for line in lines}) == 1
