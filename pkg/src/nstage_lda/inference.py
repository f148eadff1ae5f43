"""LDA fitted by collapsed Gibbs sampling."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
from numba import njit

from .corpus import Corpus, Vocabulary

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1

# Full recount of the Gibbs counts after every sweep. Costs O(tokens) per
# sweep; the test profile switches it on.
CHECK_INVARIANTS = os.environ.get("NSTAGE_CHECK_INVARIANTS", "") not in ("", "0")
invariant_stats = {"checks": 0, "violations": 0}


class InferenceError(ValueError):
    pass


class InvariantError(RuntimeError):
    """Gibbs count matrices disagree with the topic assignments."""


@dataclass(frozen=True)
class LdaConfig:
    """Sampler settings. ``alpha=None`` resolves to ``50 / num_topics``."""

    num_topics: int = 10
    alpha: Optional[float] = None
    beta: float = 0.01
    burn_in_sweeps: int = 0
    total_sweeps: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.num_topics if self.num_topics else 0.0)
        if self.num_topics < 2:
            raise InferenceError("num_topics must be >= 2")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InferenceError("alpha must be a positive real")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise InferenceError("beta must be a positive real")
        if self.burn_in_sweeps < 0:
            raise InferenceError("burn_in_sweeps must be >= 0")
        if self.total_sweeps <= self.burn_in_sweeps:
            raise InferenceError("total_sweeps must exceed burn_in_sweeps")
        if not 0 <= self.seed <= MAX_SEED:
            raise InferenceError("seed must be an unsigned 64-bit integer")

    def with_seed(self, seed: int) -> "LdaConfig":
        return replace(self, seed=seed % (MAX_SEED + 1))

    def to_dict(self) -> dict:
        return {
            "num_topics": self.num_topics,
            "alpha": self.alpha,
            "beta": self.beta,
            "burn_in_sweeps": self.burn_in_sweeps,
            "total_sweeps": self.total_sweeps,
            "seed": self.seed,
        }


@dataclass
class GibbsState:
    """Topic assignments and count matrices of one sampler chain.

    Tokens are stored flat in document-then-position order; ``doc_offsets``
    delimits documents.
    """

    words: np.ndarray
    doc_of: np.ndarray
    doc_offsets: np.ndarray
    z: np.ndarray
    ndk: np.ndarray
    nkw: np.ndarray
    nk: np.ndarray
    rng: np.random.Generator = field(repr=False)
    sweeps_done: int = 0

    @property
    def num_topics(self) -> int:
        return self.nk.shape[0]

    def z_doc(self, d: int) -> np.ndarray:
        return self.z[self.doc_offsets[d] : self.doc_offsets[d + 1]]

    def check_invariants(self) -> None:
        """Recount ndk/nkw/nk from ``z`` and compare; raise on any mismatch."""
        invariant_stats["checks"] += 1
        K = self.num_topics
        problems = []
        if self.z.size and (self.z.min() < 0 or self.z.max() >= K):
            problems.append("topic assignment out of range")
        else:
            ndk = np.zeros_like(self.ndk)
            np.add.at(ndk, (self.doc_of, self.z), 1)
            nkw = np.zeros_like(self.nkw)
            np.add.at(nkw, (self.z, self.words), 1)
            if not np.array_equal(ndk, self.ndk):
                problems.append("ndk disagrees with z")
            if not np.array_equal(nkw, self.nkw):
                problems.append("nkw disagrees with z")
        lengths = np.diff(self.doc_offsets)
        if not np.array_equal(self.ndk.sum(axis=1), lengths):
            problems.append("doc-topic rows do not sum to document lengths")
        if not np.array_equal(self.nkw.sum(axis=1), self.nk):
            problems.append("topic-word rows do not sum to topic totals")
        if int(self.nk.sum()) != self.words.size:
            problems.append("topic totals do not sum to token count")
        if problems:
            invariant_stats["violations"] += 1
            raise InvariantError("; ".join(problems))


def _flatten(corpus: Corpus) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(d) for d in corpus.documents), dtype=np.int64, count=len(corpus))
    offsets = np.zeros(len(corpus) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    words = np.fromiter(
        (t for d in corpus.documents for t in d.tokens), dtype=np.int64, count=int(offsets[-1])
    )
    doc_of = np.repeat(np.arange(len(corpus), dtype=np.int64), lengths)
    return words, doc_of, offsets


def init_state(corpus: Corpus, config: LdaConfig) -> GibbsState:
    """Assign every token a uniformly random topic drawn from the seeded generator."""
    if len(corpus) == 0:
        raise InferenceError("empty corpus")
    V = len(corpus.vocabulary)
    if V == 0:
        raise InferenceError("empty vocabulary")
    K = config.num_topics
    rng = np.random.default_rng(config.seed)
    words, doc_of, offsets = _flatten(corpus)
    z = rng.integers(0, K, size=words.size, dtype=np.int64)
    ndk = np.zeros((len(corpus), K), dtype=np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    np.add.at(ndk, (doc_of, z), 1)
    np.add.at(nkw, (z, words), 1)
    state = GibbsState(words, doc_of, offsets, z, ndk, nkw, nkw.sum(axis=1), rng)
    if CHECK_INVARIANTS:
        state.check_invariants()
    return state


@njit(cache=True, nogil=True)
def _sweep_kernel(words, doc_of, z, ndk, nkw, nk, alpha, beta, vbeta, uniforms):
    K = nk.shape[0]
    cum = np.empty(K)
    for i in range(words.shape[0]):
        w = words[i]
        d = doc_of[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        u = uniforms[i] * total
        k = K - 1
        for t in range(K):
            if u < cum[t]:
                k = t
                break
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


def gibbs_sweep(state: GibbsState, corpus: Corpus, config: LdaConfig) -> GibbsState:
    """Resample every token once, in document-then-position order (in place)."""
    if state.words.size != corpus.num_tokens or state.nkw.shape[1] != len(corpus.vocabulary):
        raise InferenceError("state does not match corpus")
    V = state.nkw.shape[1]
    uniforms = state.rng.random(state.words.size)
    _sweep_kernel(
        state.words, state.doc_of, state.z, state.ndk, state.nkw, state.nk,
        float(config.alpha), float(config.beta), float(V * config.beta), uniforms,
    )
    state.sweeps_done += 1
    if CHECK_INVARIANTS:
        state.check_invariants()
    return state


@dataclass(frozen=True)
class TopicModel:
    phi: np.ndarray
    theta: np.ndarray
    config: LdaConfig
    vocabulary: Vocabulary
    pipeline: Optional[dict] = None

    @property
    def num_topics(self) -> int:
        return self.phi.shape[0]

    def to_json(self) -> str:
        """Serialize with 17 significant digits so floats round-trip exactly."""

        def rows(m: np.ndarray) -> str:
            return "[\n" + ",\n".join(
                "  [" + ",".join(format(float(v), ".17g") for v in row) + "]" for row in m
            ) + "\n]"

        head = {"config": self.config.to_dict()}
        if self.pipeline is not None:
            head["pipeline"] = self.pipeline
        head["vocabulary"] = list(self.vocabulary.words)
        body = json.dumps(head, ensure_ascii=False, indent=1)[:-2]
        return body + ',\n "phi": ' + rows(self.phi) + ',\n "theta": ' + rows(self.theta) + "\n}\n"

    @classmethod
    def from_json(cls, text: str) -> "TopicModel":
        data = json.loads(text)
        V = len(data["vocabulary"])
        K = data["config"]["num_topics"]
        phi = np.array(data["phi"], dtype=np.float64).reshape(K, V)
        theta = np.array(data["theta"], dtype=np.float64).reshape(-1, K)
        return cls(phi, theta, LdaConfig(**data["config"]), Vocabulary(tuple(data["vocabulary"])),
                   data.get("pipeline"))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TopicModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def estimate(state: GibbsState, corpus: Corpus, config: LdaConfig) -> TopicModel:
    """Point estimates of phi and theta from the current counts."""
    K, V = state.nkw.shape
    phi = (state.nkw + config.beta) / (state.nk[:, None] + V * config.beta)
    lengths = np.diff(state.doc_offsets)
    theta = (state.ndk + config.alpha) / (lengths[:, None] + K * config.alpha)
    return TopicModel(phi, theta, config, corpus.vocabulary)


def fit(corpus: Corpus, config: LdaConfig) -> tuple[TopicModel, GibbsState]:
    """Run ``config.total_sweeps`` sweeps and estimate from the final sample."""
    state = init_state(corpus, config)
    for sweep in range(config.total_sweeps):
        gibbs_sweep(state, corpus, config)
        if (sweep + 1) % 100 == 0:
            logger.debug("sweep %d/%d", sweep + 1, config.total_sweeps)
    return estimate(state, corpus, config), state


def perplexity(model: TopicModel, corpus: Corpus) -> float:
    """exp of the negative mean per-token log likelihood under theta @ phi."""
    if len(corpus.vocabulary) != model.phi.shape[1] or len(corpus) != model.theta.shape[0]:
        raise InferenceError("corpus is not encoded against this model")
    words, doc_of, _ = _flatten(corpus)
    if words.size == 0:
        raise InferenceError("no tokens")
    probs = np.einsum("ik,ki->i", model.theta[doc_of], model.phi[:, words])
    return float(np.exp(-np.log(probs).sum() / words.size))
