"""Iterative dictionary pruning: threshold, delete, rebuild, re-fit."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .corpus import Corpus, Vocabulary, reencode
from .inference import MAX_SEED, GibbsState, LdaConfig, TopicModel, fit, perplexity

logger = logging.getLogger(__name__)


class NStageError(ValueError):
    pass


@dataclass(frozen=True)
class NStageConfig:
    n: int = 2
    lda: LdaConfig = field(default_factory=LdaConfig)
    # Restrict each topic's threshold support to its top-M assigned words.
    topn_support: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise NStageError("number of stages must be >= 1")
        if self.topn_support is not None and self.topn_support < 1:
            raise NStageError("topn_support must be >= 1")

    def stage_seed(self, stage_index: int) -> int:
        return (self.lda.seed + stage_index - 1) % (MAX_SEED + 1)


@dataclass
class StageReport:
    """What one stage did to the dictionary and how the re-fit model scored.

    ``per_topic_threshold`` and ``deleted_words`` describe the pruning that
    produced this stage's dictionary from the previous stage; both are empty
    for stage 1. A topic with no assigned words has threshold ``None``.
    """

    stage_index: int
    vocab_size_before: int
    vocab_size_after: int
    per_topic_threshold: list[Optional[float]]
    deleted_words: list[str]
    model_perplexity: float
    emptied_doc_count: int

    def to_dict(self) -> dict:
        return {
            "stage_index": self.stage_index,
            "vocab_size_before": self.vocab_size_before,
            "vocab_size_after": self.vocab_size_after,
            "per_topic_threshold": self.per_topic_threshold,
            "deleted_words": self.deleted_words,
            "model_perplexity": self.model_perplexity,
            "emptied_doc_count": self.emptied_doc_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "StageReport":
        return cls(**json.loads(line))


def topic_threshold(weights: Sequence[float]) -> float:
    """Mean weight of a topic: sum of its word weights over the word count."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise NStageError("empty topic")
    return math.fsum(w.tolist()) / w.size


def _at_or_above_mean(vals: np.ndarray) -> np.ndarray:
    threshold = topic_threshold(vals)
    keep = vals >= threshold
    # fsum/n is within ~1 ulp of the true mean; settle close calls exactly.
    near = np.abs(vals - threshold) <= 4 * np.spacing(threshold)
    if near.any():
        exact_sum = sum(map(Fraction, vals.tolist()))
        n = vals.size
        for i in np.flatnonzero(near):
            keep[i] = Fraction(float(vals[i])) * n >= exact_sum
    return keep


def survivors_for_topic(phi_row: Sequence[float], support: Iterable[int]) -> set[int]:
    """Words of ``support`` whose weight is not below the support's mean weight."""
    ids = np.array(sorted(set(support)), dtype=np.int64)
    if ids.size == 0:
        raise NStageError("empty topic")
    row = np.asarray(phi_row, dtype=np.float64)
    return set(ids[_at_or_above_mean(row[ids])].tolist())


def topic_support(state: GibbsState, k: int, topn: Optional[int] = None,
                  phi_row: Optional[np.ndarray] = None) -> np.ndarray:
    """Word-ids assigned to topic ``k``, optionally only the ``topn`` heaviest."""
    ids = np.flatnonzero(state.nkw[k] > 0)
    if topn is not None and ids.size > topn:
        weights = phi_row[ids] if phi_row is not None else state.nkw[k, ids]
        order = np.lexsort((ids, -weights))
        ids = np.sort(ids[order[:topn]])
    return ids


@dataclass
class Pruning:
    vocabulary: Vocabulary
    thresholds: list[Optional[float]]
    survivors: list[set[int]]


def prune(model: TopicModel, state: GibbsState, topn_support: Optional[int] = None) -> Pruning:
    """Per-topic mean thresholds and the union of surviving words."""
    thresholds: list[Optional[float]] = []
    survivors: list[set[int]] = []
    for k in range(model.num_topics):
        support = topic_support(state, k, topn_support, model.phi[k])
        if support.size == 0:
            thresholds.append(None)
            survivors.append(set())
            continue
        thresholds.append(topic_threshold(model.phi[k, support]))
        survivors.append(survivors_for_topic(model.phi[k], support.tolist()))
    keep = set().union(*survivors)
    if not keep:
        raise RuntimeError("every topic has empty support")
    words = model.vocabulary.words
    return Pruning(Vocabulary(tuple(words[i] for i in sorted(keep))), thresholds, survivors)


def rebuild_dictionary(model: TopicModel, state: GibbsState,
                       topn_support: Optional[int] = None) -> Vocabulary:
    """New dictionary of words surviving in at least one topic, original order kept."""
    return prune(model, state, topn_support).vocabulary


StageCallback = Callable[[int, TopicModel, GibbsState, Corpus], None]


def run_nstage(corpus: Corpus, config: NStageConfig,
               on_stage: Optional[StageCallback] = None) -> tuple[TopicModel, list[StageReport]]:
    """Fit, prune and re-fit ``config.n`` times. With ``n == 1`` this is plain LDA.

    ``on_stage`` is called after each stage's fit with
    ``(stage_index, model, state, stage_corpus)``.
    """
    if len(corpus) == 0:
        raise NStageError("empty corpus")
    reports: list[StageReport] = []
    model, state = fit(corpus, config.lda.with_seed(config.stage_seed(1)))
    reports.append(StageReport(1, len(corpus.vocabulary), len(corpus.vocabulary), [], [],
                               perplexity(model, corpus), corpus.empty_doc_count))
    if on_stage:
        on_stage(1, model, state, corpus)
    for i in range(2, config.n + 1):
        pruning = prune(model, state, config.topn_support)
        new_vocab = pruning.vocabulary
        if len(new_vocab) == 0:
            raise RuntimeError("vocabulary pruned to nothing")
        deleted = [w for w in corpus.vocabulary.words if w not in new_vocab]
        before = len(corpus.vocabulary)
        corpus = reencode(corpus, new_vocab)
        model, state = fit(corpus, config.lda.with_seed(config.stage_seed(i)))
        reports.append(StageReport(i, before, len(new_vocab), pruning.thresholds, deleted,
                                   perplexity(model, corpus), corpus.empty_doc_count))
        logger.info("stage %d: vocabulary %d -> %d", i, before, len(new_vocab))
        if on_stage:
            on_stage(i, model, state, corpus)
    return model, reports
