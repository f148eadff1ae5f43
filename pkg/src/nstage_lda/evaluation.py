"""Topic-to-class labeling and dominant-topic classification accuracy."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import Corpus
from .inference import TopicModel

Method = Literal["majority", "hungarian"]


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class TopicLabeling:
    topic_to_label: tuple[str, ...]
    method: str

    def __getitem__(self, k: int) -> str:
        return self.topic_to_label[k]


@dataclass
class EvalResult:
    accuracy: float
    labels: list[str]
    # confusion[i][j]: documents with true label labels[i] predicted as labels[j]
    confusion: np.ndarray
    per_stage: Optional[list[tuple[int, float]]] = None

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "labels": self.labels,
            "confusion": self.confusion.tolist(),
        }
        if self.per_stage is not None:
            out["per_stage"] = [list(p) for p in self.per_stage]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    def confusion_table(self) -> str:
        """Aligned text table, rows = true label, columns = predicted label."""
        head = ["true\\pred"] + self.labels
        rows = [[lab] + [str(int(v)) for v in row] for lab, row in zip(self.labels, self.confusion)]
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        return "\n".join(
            "  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths)))
            for r in [head] + rows
        )


def dominant_topic(theta_row: Sequence[float]) -> int:
    """Index of the largest entry; the lowest index wins ties."""
    return int(np.argmax(np.asarray(theta_row)))


def _require_labels(corpus: Corpus) -> None:
    if not corpus.is_labeled:
        raise EvalError("labels required")


def _agreement(model: TopicModel, corpus: Corpus, docs: Sequence[int],
               labels: list[str]) -> np.ndarray:
    """counts[k][j]: documents with dominant topic k and true label labels[j]."""
    col = {lab: j for j, lab in enumerate(labels)}
    counts = np.zeros((model.num_topics, len(labels)), dtype=np.int64)
    for d in docs:
        counts[dominant_topic(model.theta[d]), col[corpus.documents[d].label]] += 1
    return counts


def label_topics(model: TopicModel, corpus: Corpus, method: Method = "majority",
                 docs: Optional[Sequence[int]] = None) -> TopicLabeling:
    """Assign a class label to every topic using the documents' true labels.

    ``majority`` gives each topic the most common label among documents it
    dominates (ties to the lexicographically smallest label; topics that
    dominate nothing take the globally most common label). ``hungarian``
    finds the one-to-one topic/label assignment with maximum agreement;
    topics left over when K exceeds the label count fall back to majority.
    ``docs`` limits the documents consulted (default: all).
    """
    _require_labels(corpus)
    if len(corpus) != model.theta.shape[0]:
        raise EvalError("corpus does not match model documents")
    docs = range(len(corpus)) if docs is None else docs
    labels = sorted(corpus.labels)
    counts = _agreement(model, corpus, docs, labels)
    overall = Counter(corpus.documents[d].label for d in docs)
    if not overall:
        raise EvalError("no labeled documents")
    fallback = min(overall, key=lambda lab: (-overall[lab], lab))
    # argmax over sorted labels takes the smallest label on ties
    majority = [labels[int(np.argmax(row))] if row.any() else fallback for row in counts]
    if method == "majority":
        return TopicLabeling(tuple(majority), method)
    if method != "hungarian":
        raise EvalError(f"unknown labeling method {method!r}")
    if model.num_topics < len(labels):
        raise EvalError("hungarian labeling needs at least as many topics as labels")
    rows, cols = linear_sum_assignment(counts, maximize=True)
    mapping = list(majority)
    for k, j in zip(rows, cols):
        mapping[k] = labels[j]
    return TopicLabeling(tuple(mapping), method)


def evaluate(model: TopicModel, corpus: Corpus, labeling: TopicLabeling,
             docs: Optional[Sequence[int]] = None) -> EvalResult:
    """Classify each document as the label of its dominant topic."""
    _require_labels(corpus)
    if len(corpus) != model.theta.shape[0]:
        raise EvalError("corpus does not match model documents")
    docs = list(range(len(corpus)) if docs is None else docs)
    if not docs:
        raise EvalError("no labeled documents to evaluate")
    labels = sorted(corpus.labels | set(labeling.topic_to_label))
    idx = {lab: j for j, lab in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for d in docs:
        predicted = labeling[dominant_topic(model.theta[d])]
        confusion[idx[corpus.documents[d].label], idx[predicted]] += 1
    return EvalResult(float(np.trace(confusion) / len(docs)), labels, confusion)


def split_documents(n_docs: int, test_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Seeded random split into (train, test) document indices."""
    if not 0.0 < test_fraction < 1.0:
        raise EvalError("test_fraction must be in (0, 1)")
    perm = np.random.default_rng(seed).permutation(n_docs)
    n_test = max(1, int(round(test_fraction * n_docs)))
    if n_test >= n_docs:
        raise EvalError("split leaves no training documents")
    return sorted(perm[n_test:].tolist()), sorted(perm[:n_test].tolist())


def classify(model: TopicModel, corpus: Corpus, method: Method = "majority",
             test_fraction: Optional[float] = None, seed: int = 0) -> EvalResult:
    """Label topics and score them; in-sample unless ``test_fraction`` is set.

    With a split, topic labels are learned from the training documents' labels
    and accuracy is measured on the held-out documents.
    """
    if test_fraction is None:
        return evaluate(model, corpus, label_topics(model, corpus, method))
    train, test = split_documents(len(corpus), test_fraction, seed)
    return evaluate(model, corpus, label_topics(model, corpus, method, train), test)
