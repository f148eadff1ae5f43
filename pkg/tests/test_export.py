import numpy as np
import pytest

from nstage_lda.corpus import Corpus, Document, Vocabulary
from nstage_lda.export import (
    ExportError,
    export_arff,
    export_topics,
    parse_arff,
    read_arff,
    top_words,
    topics_table,
)
from nstage_lda.inference import LdaConfig, TopicModel


def model_with(phi, theta, words=("a", "b", "c")):
    return TopicModel(np.asarray(phi, float), np.asarray(theta, float),
                      LdaConfig(num_topics=2), Vocabulary(tuple(words)))


def test_arff_row_format(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.75, 0.25]])
    corpus = Corpus(model.vocabulary, (Document((0,), "anger"),))
    path = tmp_path / "out.arff"
    export_arff(model, corpus, path)
    text = path.read_bytes().decode("utf-8")
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0] == "@RELATION nstage_lda"
    assert "@ATTRIBUTE t0 NUMERIC" in lines and "@ATTRIBUTE t1 NUMERIC" in lines
    assert "@ATTRIBUTE class {anger}" in lines
    assert lines[-1] == "0.750000,0.250000,anger"


def test_arff_empty_document_row():
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.5, 0.5], [0.9, 0.1]])
    corpus = Corpus(model.vocabulary, (Document((), "fear"), Document((1,), "joy")))
    from nstage_lda.export import arff_text

    data = arff_text(model, corpus).splitlines()
    assert data[-2] == "0.500000,0.500000,fear"
    assert "@ATTRIBUTE class {fear,joy}" in data


def test_arff_quotes_awkward_labels(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.6, 0.4], [0.3, 0.7]])
    corpus = Corpus(model.vocabulary, (Document((0,), "very sad"), Document((1,), "it's,ok")))
    path = tmp_path / "q.arff"
    export_arff(model, corpus, path)
    parsed = read_arff(path)
    assert parsed.attributes[-1][1] == "{'it\\'s,ok','very sad'}"
    assert [r[-1] for r in parsed.rows] == ["very sad", "it's,ok"]


def test_arff_requires_labels(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.6, 0.4]])
    corpus = Corpus(model.vocabulary, (Document((0,)),))
    with pytest.raises(ExportError):
        export_arff(model, corpus, tmp_path / "x.arff")


def test_arff_unwritable_path(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.6, 0.4]])
    corpus = Corpus(model.vocabulary, (Document((0,), "a"),))
    with pytest.raises(OSError):
        export_arff(model, corpus, tmp_path / "missing-dir" / "x.arff")


def test_arff_topic_words_mode(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]], [[0.6, 0.4]], words=("a", "b b", "ç"))
    path = tmp_path / "tw.arff"
    export_arff(model, None, path, mode="topic-words")
    parsed = read_arff(path)
    assert [a for a, _ in parsed.attributes] == ["a", "b b", "ç"]
    assert parsed.rows == [[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]]


def test_arff_roundtrip_on_fitted_model(clean_fit, clean_corpus, tmp_path):
    model, _ = clean_fit
    path = tmp_path / "clean.arff"
    export_arff(model, clean_corpus, path)
    parsed = read_arff(path)
    K = model.num_topics
    assert parsed.relation == "nstage_lda"
    assert len(parsed.rows) == len(clean_corpus) and len(parsed.attributes) == K + 1
    sums = np.array([sum(r[:K]) for r in parsed.rows])
    assert np.abs(sums - 1).max() <= 5e-6
    assert [r[-1] for r in parsed.rows] == [d.label for d in clean_corpus.documents]


def test_parse_rejects_ragged_rows():
    with pytest.raises(ExportError):
        parse_arff("@RELATION r\n@ATTRIBUTE x NUMERIC\n@DATA\n1,2\n")


def test_top_words_ordering():
    model = model_with([[0.5, 0.3, 0.2], [0.25, 0.5, 0.25]], [[0.5, 0.5]])
    assert top_words(model, 0, 2) == [("a", 0.5), ("b", 0.3)]
    assert top_words(model, 0, 10) == [("a", 0.5), ("b", 0.3), ("c", 0.2)]
    assert [w for w, _ in top_words(model, 1, 3)] == ["b", "a", "c"]
    with pytest.raises(ExportError):
        top_words(model, 0, 0)


def test_topics_table(tmp_path):
    model = model_with([[0.5, 0.3, 0.2], [0.25, 0.5, 0.25]], [[0.5, 0.5]])
    path = tmp_path / "topics.tsv"
    export_topics(model, 2, path)
    assert path.read_text(encoding="utf-8") == topics_table(model, 2)
    rows = [line.split("\t") for line in path.read_text().splitlines()]
    assert rows[0] == ["topic", "word", "weight"]
    assert rows[1:] == [["0", "a", "0.500000"], ["0", "b", "0.300000"],
                        ["1", "b", "0.500000"], ["1", "a", "0.250000"]]
