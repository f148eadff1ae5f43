"""Seeded synthetic corpora drawn from a planted LDA model.

Each planted topic owns a disjoint block of words. Optional noise words are
shared by no topic: a noise token is drawn uniformly from the noise block.
A document's class label is its dominant planted topic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LabeledLine
from .inference import LdaConfig


@dataclass(frozen=True)
class SyntheticSpec:
    num_topics: int = 3
    words_per_topic: int = 10
    noise_words: int = 0
    num_docs: int = 200
    doc_length: int = 50
    alpha: float = 0.1
    # Dirichlet concentration for word weights inside a topic's block.
    word_concentration: float = 1.0
    noise_rate: float = 0.0
    seed: int = 0

    @property
    def vocab_size(self) -> int:
        return self.num_topics * self.words_per_topic + self.noise_words


CLEAN = SyntheticSpec(seed=20240101)
NOISY = SyntheticSpec(words_per_topic=50, noise_words=150, num_docs=400, doc_length=40,
                      alpha=0.5, word_concentration=10.0, noise_rate=0.5, seed=20240102)

# Sampler settings the regression runs on CLEAN and NOISY are pinned to.
SHIPPED_LDA = LdaConfig(num_topics=3, alpha=0.1, beta=0.01, total_sweeps=1000, seed=0)


@dataclass
class SyntheticCorpus:
    spec: SyntheticSpec
    words: list[str]
    phi: np.ndarray
    theta: np.ndarray
    lines: list[LabeledLine]

    def topic_words(self, k: int) -> list[str]:
        return [w for w, p in zip(self.words, self.phi[k]) if p > 0]

    def to_tsv(self) -> str:
        return "".join(f"{label}\t{text}\n" for label, text in self.lines)


def disjoint_groups(docs_per_group: int = 10, doc_length: int = 20,
                    seed: int = 0) -> list[LabeledLine]:
    """Two document groups "a" and "b" that share no words."""
    rng = np.random.default_rng(seed)
    lines: list[LabeledLine] = []
    for group in ("a", "b"):
        vocab = [f"{group}{j}" for j in range(5)]
        for _ in range(docs_per_group):
            lines.append((group, " ".join(rng.choice(vocab, size=doc_length))))
    return lines


def word_names(spec: SyntheticSpec) -> list[str]:
    words = [f"t{k}w{j:02d}" for k in range(spec.num_topics) for j in range(spec.words_per_topic)]
    return words + [f"noise{j:03d}" for j in range(spec.noise_words)]


def generate(spec: SyntheticSpec) -> SyntheticCorpus:
    """Draw a corpus from the planted model described by ``spec``."""
    rng = np.random.default_rng(spec.seed)
    K, B = spec.num_topics, spec.words_per_topic
    words = word_names(spec)
    phi = np.zeros((K, spec.vocab_size))
    for k in range(K):
        phi[k, k * B : (k + 1) * B] = rng.dirichlet(np.full(B, spec.word_concentration))
    noise_ids = np.arange(K * B, spec.vocab_size)
    theta = rng.dirichlet(np.full(K, spec.alpha), size=spec.num_docs)
    lines: list[LabeledLine] = []
    for d in range(spec.num_docs):
        z = rng.choice(K, size=spec.doc_length, p=theta[d])
        ids = np.array([rng.choice(spec.vocab_size, p=phi[k]) for k in z])
        if spec.noise_words and spec.noise_rate > 0:
            noisy = rng.random(spec.doc_length) < spec.noise_rate
            ids[noisy] = rng.choice(noise_ids, size=int(noisy.sum()))
        label = f"c{int(np.argmax(theta[d]))}"
        lines.append((label, " ".join(words[i] for i in ids)))
    return SyntheticCorpus(spec, words, phi, theta, lines)


def tiny_corpus_path():
    """Path of the bundled twelve-document labeled corpus."""
    from importlib.resources import files

    return files("nstage_lda") / "data" / "tiny.tsv"
